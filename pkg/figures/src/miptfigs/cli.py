"""figures <kind> --in ... --out ...

Kinds: collapse (DataPoint CSV + fit JSON), landscape (landscape CSV +
fit JSON), phase-diagram (one boundary CSV per curve). Inputs are matched
by content, so --in order does not matter. Exit codes: 0 success,
2 schema error, 3 provenance error, 4 interpolation error.
"""

from __future__ import annotations

import argparse
import sys

from .inputs import InterpolationError, ProvenanceError, SchemaError
from .render import render_collapse, render_landscape, render_phase_diagram

EXIT_SCHEMA = 2
EXIT_PROVENANCE = 3
EXIT_INTERPOLATION = 4


def _classify(paths):
    """Split inputs into (json files, csv files by header)."""
    jsons, csvs = [], {}
    for p in paths:
        if str(p).endswith(".json"):
            jsons.append(p)
            continue
        try:
            with open(p, "r", encoding="utf-8") as fh:
                header = fh.readline().strip()
        except OSError as exc:
            raise SchemaError(f"cannot read {p!r}: {exc}") from exc
        csvs.setdefault(header.split(",")[0], []).append(p)
    return jsons, csvs


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="figures", description=__doc__)
    ap.add_argument("kind", choices=["collapse", "landscape", "phase-diagram"])
    ap.add_argument("--in", dest="inputs", nargs="+", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    try:
        if args.kind == "collapse":
            jsons, csvs = _classify(args.inputs)
            if not jsons:
                raise ProvenanceError("collapse needs the fit-report JSON")
            data = csvs.get("L", [])
            if not data:
                raise SchemaError("collapse needs a DataPoint CSV")
            render_collapse(data[0], jsons[0], args.out)
        elif args.kind == "landscape":
            jsons, csvs = _classify(args.inputs)
            if not jsons:
                raise ProvenanceError("landscape needs the fit-report JSON")
            land = csvs.get("pc", [])
            if not land:
                raise SchemaError("landscape needs a landscape CSV")
            render_landscape(land[0], jsons[0], args.out)
        else:
            render_phase_diagram(args.inputs, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ProvenanceError as exc:
        print(f"provenance error: {exc}", file=sys.stderr)
        return EXIT_PROVENANCE
    except InterpolationError as exc:
        print(f"interpolation error: {exc}", file=sys.stderr)
        return EXIT_INTERPOLATION
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
