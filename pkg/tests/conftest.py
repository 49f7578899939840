import json
import pathlib
import sys
import time

import pytest

HELPERS = pathlib.Path(__file__).parent / "helpers"
WORKER = pathlib.Path(__file__).parent.parent / "worker" / "eval_worker.py"

# 19-channel EEG montage; FP1 deliberately first so searches that descend in
# index order exercise it early.
EEG_NAMES = [
    "FP1", "FP2", "F3", "F4", "F7", "F8", "C3", "C4", "T3", "T4",
    "T5", "T6", "P3", "P4", "O1", "O2", "FZ", "CZ", "PZ",
]


@pytest.fixture(scope="session")
def eeg_names():
    return list(EEG_NAMES)


@pytest.fixture(scope="session")
def echo_script():
    return [sys.executable, str(HELPERS / "echo_evaluator.py")]


@pytest.fixture(scope="session")
def worker_script():
    return [sys.executable, str(WORKER)]


@pytest.fixture(scope="session")
def eeg_replay_bundle(tmp_path_factory, eeg_names):
    """Shared minimum-cost EEG replay scenario.

    A monotone lookup oracle where {FP1} is the only feasible singleton at
    lambda=0.7: every superset of FP1 replays 0.7031, everything else 0.05.
    The branch-and-bound run over it is done once here, timed, and reused by
    the end-to-end test and by the external-worker equivalence test. A worker
    replay table with the same values is written alongside.
    """
    from chanselect import (
        ScoreParams,
        TableOracle,
        branch_and_bound,
        equal_costs,
        verify_table_monotone,
    )
    from chanselect.cli import outcome_document, serialize_document

    n = len(eeg_names)
    assert eeg_names[0] == "FP1"
    params = ScoreParams(alpha=0.5, lam=0.7)

    started = time.perf_counter()
    entries = {1 | (rest << 1): 0.7031 for rest in range(1 << (n - 1))}
    oracle = TableOracle(n, entries, default=0.05, claims_monotone=True)
    certified = verify_table_monotone(oracle)
    outcome = branch_and_bound(
        n, equal_costs(n), oracle, 0.7, params, channel_names=eeg_names
    )
    elapsed = time.perf_counter() - started

    config = {"evaluator": "eeg-replay", "lambda": 0.7, "alpha": 0.5}
    document = serialize_document(outcome_document(outcome, eeg_names, config, True))

    table_path = tmp_path_factory.mktemp("replay") / "table.json"
    with open(table_path, "w") as fh:
        fh.write('{"default":0.05,"entries":[')
        first = True
        for rest in range(1 << (n - 1)):
            bits = 1 | (rest << 1)
            names = [eeg_names[i] for i in range(n) if bits >> i & 1]
            item = json.dumps(
                {"channels": names, "performance": 0.7031}, separators=(",", ":")
            )
            fh.write(item if first else "," + item)
            first = False
        fh.write("]}")

    return {
        "params": params,
        "lam": 0.7,
        "oracle": oracle,
        "certified": certified,
        "outcome": outcome,
        "elapsed": elapsed,
        "config": config,
        "document": document,
        "table_path": table_path,
    }
