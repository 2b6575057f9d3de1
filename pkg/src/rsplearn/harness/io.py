"""File formats: MDP / feature / policy JSON and sample-set CSV."""

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from ..markov import Mdp
from ..policy import FeatureMap, Rsp, SampleSet


def jsonable(obj):
    """Recursively replace non-finite floats by ``"inf"``, ``"-inf"`` or ``"nan"``."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, doc):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(doc), indent=2) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc


def load_mdp(path):
    return Mdp.from_dict(read_json(path))


def load_feature_map(path):
    return FeatureMap.from_dict(read_json(path))


def _resolve(ref, base):
    p = Path(ref)
    if p.is_absolute() or p.exists():
        return p
    return Path(base).parent / p


def rsp_from_dict(doc, base_path="."):
    """Build an RSP from ``{"theta": [...], "feature_map": <path or inline>}``."""
    try:
        fm = doc["feature_map"]
        theta = doc["theta"]
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"RSP document lacks {exc}") from exc
    features = load_feature_map(_resolve(fm, base_path)) if isinstance(fm, str) else FeatureMap.from_dict(fm)
    return Rsp(np.asarray(theta, dtype=float), features)


def load_rsp(path):
    return rsp_from_dict(read_json(path), path)


def rsp_to_dict(rsp, feature_map_ref=None):
    return {
        "theta": rsp.theta.tolist(),
        "feature_map": feature_map_ref if feature_map_ref is not None else rsp.features.to_dict(),
    }


def load_policy(path):
    """A JSON array of actions (deterministic) or an RSP document."""
    doc = read_json(path)
    if isinstance(doc, list):
        return np.asarray(doc, dtype=np.int64)
    return rsp_from_dict(doc, path)


def write_samples(path, samples):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if samples.seed is not None:
            fh.write(f"# seed={samples.seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["state", "action"])
        writer.writerows(zip(samples.states.tolist(), samples.actions.tolist()))


def read_samples(path):
    seed = None
    states, actions = [], []
    with Path(path).open(newline="") as fh:
        rows = []
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key.strip() == "seed":
                    seed = int(value)
                continue
            rows.append(line)
    reader = csv.DictReader(rows)
    if reader.fieldnames is None or reader.fieldnames[:2] != ["state", "action"]:
        raise ConfigurationError(f"{path}: expected header 'state,action'")
    for row in reader:
        states.append(int(row["state"]))
        actions.append(int(row["action"]))
    return SampleSet(np.array(states, dtype=np.int64), np.array(actions, dtype=np.int64), seed)
