"""Regenerate tests/golden.  Run from the repository root: python3 tests/regen_golden.py

Transfer documents for the L-infinity fixtures come from the tree formula,
not from the pipeline, so comparing the CLI against them is a real check.
Reports are snapshots of the CLI output.
"""
import contextlib
import io
import pathlib
import sys

from bvhtt.cli import main
from bvhtt.document import ProblemDocument, parse_problem, serialize
from bvhtt.htt import htt_transfer
from bvhtt.sdr import compute_homology_sdr
from bvhtt.structures import to_derivation, to_multilinear

HERE = pathlib.Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"

LINF_FIXTURES = ("zero_differential", "acyclic_pair", "massey")
REPORT_COMMANDS = ("validate", "transfer", "double", "halve", "wick-check", "stokes-check")


def oracle_document(name: str) -> str:
    doc = parse_problem((FIXTURES / f"{name}.txt").read_text(encoding="utf-8"))
    m = doc.linf()
    sdr = doc.sdr if doc.sdr is not None else compute_homology_sdr(m.space)
    fam = htt_transfer(to_multilinear(m), sdr)
    return serialize(ProblemDocument(sdr.small, to_derivation(fam), None, None, {"cutoff": m.cutoff}))


def cli_output(argv) -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def expected_files() -> dict[str, str]:
    out = {}
    for name in LINF_FIXTURES:
        out[f"{name}.transfer.txt"] = oracle_document(name)
    for path in sorted(FIXTURES.glob("*.txt")):
        for cmd in REPORT_COMMANDS:
            code, text = cli_output([cmd, str(path.relative_to(HERE.parent))])
            out[f"{path.stem}.{cmd}.report"] = text
    return out


if __name__ == "__main__":
    GOLDEN.mkdir(exist_ok=True)
    for fname, text in expected_files().items():
        (GOLDEN / fname).write_text(text, encoding="utf-8")
        print("wrote", fname)
    sys.exit(0)
