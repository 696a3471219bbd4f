import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from .config import get_settings


def resolve_output(path: str | Path) -> Path:
    """Bare file names land in the configured output directory."""
    p = Path(path)
    if p.parent == Path('.') and not p.is_absolute():
        p = Path(get_settings().output_dir) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    p = resolve_output(path)
    with p.open('w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            # repr garde les 17 chiffres significatifs
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return p


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        header = next(reader, [])
        return header, [row for row in reader]


def write_json(path: str | Path, payload: Any) -> Path:
    p = resolve_output(path)
    if hasattr(payload, 'model_dump_json'):
        p.write_text(payload.model_dump_json(indent=2, by_alias=True), encoding='utf-8')
    else:
        p.write_text(json.dumps(payload, indent=2), encoding='utf-8')
    return p


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding='utf-8'))
