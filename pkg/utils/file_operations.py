import json
import logging
from pathlib import Path

from utils.dsl_text import parse_model, print_model

logger = logging.getLogger(__name__)

DISPLAY_STREAM_NAME = "displays.xml"
DEAD_LETTER_NAME = "dead_letters.json"


def load_model(path):
    """
    Read and parse one .bsd model file.

    Args:
        path: Path to the model file

    Returns:
        Invariant: The normalized model

    Raises:
        OSError: The file cannot be read
        ParseError: The text is not a well-formed model
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    logger.debug("Parsing model %s (%d bytes)", path, len(text))
    return parse_model(text)


def load_models(paths):
    return [load_model(p) for p in paths]


def save_model(model, path, clock=False):
    """Write ``model`` in canonical text form; returns the path written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(print_model(model, clock=clock) + "\n")
    return path


def read_event_log(path):
    """
    Read a newline-delimited event log.

    Returns:
        list: The non-blank lines, undecoded; validation happens at ingestion
    """
    with open(Path(path), "r", encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.strip()]


def write_event_log(events, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for event in events:
            f.write(json.dumps(event, sort_keys=True) + "\n")
    return path


def write_display_stream(documents, out_dir):
    """Write all XML documents into one stream file, separated by a blank line."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / DISPLAY_STREAM_NAME
    with open(path, "w", encoding="utf-8") as f:
        f.write(join_documents(documents))
    logger.info("Wrote %d display documents to %s", len(documents), path)
    return [path]


def write_display_files(named_documents, out_dir):
    """Write one ``<event id>.xml`` file per (event id, document) pair."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for event_id, document in named_documents:
        path = out_dir / f"{event_id}.xml"
        with open(path, "w", encoding="utf-8") as f:
            f.write(document + "\n")
        written.append(path)
    logger.info("Wrote %d display files to %s", len(written), out_dir)
    return written


def join_documents(documents):
    if not documents:
        return ""
    return "\n\n".join(documents) + "\n"


def write_dead_letters(report, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / DEAD_LETTER_NAME
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, ensure_ascii=False)
    return path


def save_text(text, path):
    """Write plain text output (DIMACS files, reports)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    return path
