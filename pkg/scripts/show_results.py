#!/usr/bin/env python3
"""Pretty print an exported CSV file or a JSON envelope written by the CLI."""
import sys
import json
from pathlib import Path
sys.path.insert(0, 'src')

from linear_pantograph.export import read_csv

def show_csv(path: Path):
    header, rows = read_csv(path)
    if not rows:
        print("ℹ️  Empty CSV file")
        return
    print(f"\n📊 {path.name} ({len(rows)} rows)\n")
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    print("-"*80)
    for row in rows[:50]:
        print("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    if len(rows) > 50:
        print(f"... {len(rows) - 50} more rows")

def show_envelope(path: Path):
    data = json.loads(path.read_text(encoding='utf-8'))
    print(f"\n📦 Command: {data.get('command')}")
    print(f"   Inputs:  {data.get('inputs')}")
    results = data.get('results')
    if data.get('command') == 'check' and isinstance(results, dict):
        for check in results.get('checks', []):
            status_emoji = '✅' if check['passed'] else '❌'
            print(f"   {status_emoji} [{check['suite']}] {check['name']}: {check['measured']} (< {check['threshold']})")
    else:
        text = json.dumps(results, indent=2)
        if len(text) > 2000:
            text = text[:2000] + "\n..."
        print(text)

    diagnostics = data.get('diagnostics', {})
    if diagnostics.get('warnings'):
        print(f"\n⚠️  Warnings:")
        for w in diagnostics['warnings']:
            print(f"   - {w}")
    if diagnostics.get('condition_flags'):
        print(f"\n🚩 Flags: {', '.join(diagnostics['condition_flags'])}")
    print()

if __name__ == '__main__':
    if len(sys.argv) != 2:
        print("Usage: python scripts/show_results.py <file.csv|file.json>")
        sys.exit(2)
    path = Path(sys.argv[1])
    if not path.exists():
        print(f"❌ No file found at {path}")
        sys.exit(1)
    try:
        if path.suffix == '.csv':
            show_csv(path)
        else:
            show_envelope(path)
    except Exception as e:
        print(f"❌ Error: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
