"""Smoke test for the `miniats` extension. Run with pytest or directly."""

from pathlib import Path

import miniats

CORPUS = Path(__file__).resolve().parent.parent / "crates" / "core" / "corpus"


def source(name):
    return (CORPUS / name).read_text()


def test_tokenize():
    toks = miniats.tokenize("fun f (x: int) : int = x + 1")
    assert toks[0] == ("keyword", "fun", 1, 1)
    assert [t[1] for t in toks][-3:] == ["x", "+", "1"]


def test_check_accepts_and_rejects():
    ok = miniats.check(source("fibats.mats"), file="fibats.mats")
    assert ok.accepted and not ok.diagnostics and ok.constraints
    bad = miniats.check(source("mutations/insort_swap_branch.mats"))
    assert not bad
    assert any(d.kind == "UnsolvedConstraint" for d in bad.diagnostics)


def test_erase_and_run():
    src = source("qsrt_verified.mats")
    erased = miniats.erase(src)
    assert "prfun" not in erased and "prval" not in erased
    assert miniats.check(erased).accepted
    assert miniats.run(src, ["[3,0,3,1]"], entry="qsrt_int") == "[0,1,3,3]"
    assert miniats.run(source("fibats.mats"), ["30"], entry="fibats") == "832040"


def test_fuel_and_errors():
    try:
        miniats.run(source("fib_plain.mats"), ["20"], entry="fib", fuel=50)
    except miniats.FuelExhausted:
        pass
    else:
        raise AssertionError("expected FuelExhausted")
    try:
        miniats.erase(source("mutations/insort_swap_branch.mats"))
    except miniats.MiniatsError as e:
        assert "rejected" in str(e)
    else:
        raise AssertionError("expected MiniatsError")


def test_audit():
    rows = miniats.audit(source("prelude_insort_lemmas.mats"))
    assert len(rows) == 11 and all(r.passed for r in rows)
    refl = [r for r in rows if r.name == "PERM_refl"][0]
    assert refl.cases == 341
    (bad,) = miniats.audit(source("mutations/false_lemma.mats"))
    assert not bad.passed
    assert bad.counterexample == [("xs", "[0,1]"), ("ys", "[1,0]")]
    assert repr(bad) == "PERM2ORD FAIL xs=[0,1], ys=[1,0]"


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"{name}: ok")
