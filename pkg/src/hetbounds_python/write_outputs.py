import json
import logging
from pathlib import Path

import numpy as np

from . import __version__

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
FLOAT_FORMAT = "%.10g"
PACKAGE = "hetbounds_python"


def _plain(value):
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_plain(item) for item in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    return value


def manifest(config):
    """Manifest document: package, version and the resolved configuration."""
    return {"package": PACKAGE, "version": __version__, "config": config.to_dict()}


def write_outputs(out_dir, config, frames=None, documents=None):
    """Write result tables and JSON documents of one run

    Tables go to ``<name>.csv`` with floats in a fixed ``%.10g`` format,
    documents to ``<name>.json`` with sorted keys, and the run configuration
    to ``manifest.json``. Nothing time-dependent is written, so a repeated
    run produces byte-identical files. ``None`` entries are skipped.

    :param out_dir: output directory, created if missing
    :type out_dir: str or pathlib.Path
    :param config: resolved run configuration
    :type config: RunConfig
    :param frames: tables by file stem
    :type frames: dict of pandas.DataFrame
    :param documents: JSON documents by file stem
    :type documents: dict
    :returns: written paths
    :rtype: list of pathlib.Path
    :examples: write_outputs("out", RunConfig(), {"coverage": table})
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, frame in (frames or {}).items():
        if frame is None:
            continue
        path = out_dir / f"{name}.csv"
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        written.append(path)
    documents = dict(documents or {})
    documents["manifest"] = manifest(config)
    for name, document in documents.items():
        if document is None:
            continue
        path = out_dir / f"{name}.json"
        with path.open("w", encoding="utf-8") as handle:
            json.dump(_plain(document), handle, sort_keys=True, indent=2)
            handle.write("\n")
        written.append(path)
    logger.info("wrote %d files to %s", len(written), out_dir)
    return written
