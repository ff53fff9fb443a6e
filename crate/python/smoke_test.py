"""Smoke test for the pymelowave extension module.

Build it first, e.g. `maturin develop -m crates/python/Cargo.toml`, or copy
target/release/libpymelowave.so to pymelowave.so somewhere on sys.path.
"""

import math
import os
import tempfile

import pymelowave as mw


def close(a, b, tol=1e-9):
    return len(a) == len(b) and all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    seq = mw.NoteSequence([(0, 0.5, 60), (0.5, 1.5, 62)])
    assert len(seq) == 2 and seq.total_duration == 2.0

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "m.mid")
        mw.write_midi(seq, path)
        back = mw.read_midi(path)
        assert back.notes() == seq.notes(), back.notes()
        try:
            mw.read_midi(os.path.join(d, "missing.mid"))
        except OSError:
            pass
        else:
            raise AssertionError("missing file should raise OSError")

    assert mw.pitch_signal(seq, rate=2) == [60, 62, 62, 62]
    assert mw.resample(seq, 8) == [60, 60, 62, 62, 62, 62, 62, 62]
    assert close(mw.mean_normalize([1.0, 3.0]), [-1.0, 1.0])

    flat = mw.pitch_signal(mw.NoteSequence([(0, 4, 67)]))
    assert all(abs(c) <= 1e-12 for c in mw.haar(flat, 1.0))

    step = [0.0] * 8 + [1.0] * 8
    coeffs = mw.haar_support(step, 4)
    assert len(coeffs) == len(step)
    assert max(range(len(coeffs)), key=lambda i: abs(coeffs[i])) == 6

    rows = mw.scalogram(step, [0.25, 0.5], rate=8)
    assert len(rows) == 2 and all(v >= 0 for r in rows for v in r)

    assert mw.zero_crossings([1.0, -1.0, 2.0])[0] == 0
    assert mw.constant_boundaries(10, 4) == [0, 4, 8, 10]
    assert mw.local_maxima([0.0, 1.0, 0.0, 2.0, 0.0])[0] == 0
    assert mw.lbdm_boundaries(seq, 0.5)[0] == 0
    assert len(mw.lbdm_strengths(seq)) == 1

    sig = [60.0, 64.0, 67.0]
    assert mw.variation(sig, "R") == [67.0, 64.0, 60.0]
    assert mw.variation(sig, "RI") == mw.variation(mw.variation(sig, "I"), "R")

    label, dist = mw.knn([[0, 0], [1, 0], [5, 5]], [0, 0, 1], [4.5, 5], k=1, metric="cityblock")
    assert label == 1 and math.isclose(dist, 0.5)
    try:
        mw.knn([[0.0]], [0], [0.0], metric="chebyshev")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown metric should raise ValueError")

    corpus = mw.FolkCorpus.synthetic(1, families=5, min_variants=4, max_variants=5)
    assert len(corpus) == len(corpus.songs()) and len(corpus.families) == 5
    acc, trace = mw.run_folk(corpus, seg="ws-max", scale_qn=1.0)
    assert len(trace) == len(corpus)
    assert math.isclose(acc, sum(t == p for _, t, p, _ in trace) / len(trace))
    acc, _ = mw.run_folk(corpus, rep="vr", seg="none")
    assert 0.0 <= acc <= 1.0

    print("pymelowave smoke test passed")


if __name__ == "__main__":
    main()
