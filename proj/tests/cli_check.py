"""End-to-end checks of the kconf command line: exit codes and report fields."""
import json
import os
import subprocess
import sys
import tempfile

EXE = sys.argv[1]
failures = []


def run(*args, code=0):
    p = subprocess.run([EXE, *args], capture_output=True, text=True)
    if p.returncode != code:
        failures.append(f"{args}: exit {p.returncode}, wanted {code}\n{p.stdout}{p.stderr}")
        return None
    try:
        return json.loads(p.stdout)
    except json.JSONDecodeError:
        return None


def check(cond, what):
    if not cond:
        failures.append(what)


r = run("invariants", "--f", "sin(y)*(1+0.2*sin(y))", "--period", "2*pi")
if r:
    res = r["result"]
    check(res["n"] == 2 and res["lambdas"] == [1.0, -1.0], "invariants list")
    check(abs(res["mu"] - (-2 * 3.141592653589793 * 0.2 / (1 - 0.04) ** 0.5)) < 1e-9, "invariants mu")
    for key in ("version", "conventions", "tolerances"):
        check(key in r, f"report lacks {key}")
    check("curvature" in r["conventions"] and "orientation" in r["conventions"], "conventions block")

r = run("match-cp", "--f", "4*sin(t)", "--period", "2*pi")
if r:
    check(abs(r["result"]["b"]) < 1e-9 and r["result"]["k"] == 1 and abs(r["result"]["a"] - 4) < 1e-9, "match-cp 4 sin")

r = run("equiv", "--f", "sin(y)", "--g", "sin(y)")
if r:
    c = r["result"]["certificate"]
    check(c["a"] == 1.0 and c["shift"] == 0 and not c["reversed"], "identity certificate")

run("equiv", "--f", "sin(y)", "--g", "sin(y)*(1+0.2*sin(y))", code=2)
run("mehidi", "--f", "sin(y)*(1+0.5*cos(y))", code=2)
run("match-cp", "--f", "sin(y)*(1+0.5*cos(y))", code=2)
run("cover-conformal", "--f", "sin(y)", "--g", "sin(y)*(1+0.2*sin(y))", code=2)
run("invariants", "--f", "sin(", code=1)
run("invariants", "--f", "sin(y)+x", code=1)
run("invariants", "--f", "sin(y)", "--period", "3", code=1)
run("nonsense", code=1)
run("geodesic", "--f", "4*sin(y)", "--state", "0,1", code=1)

r = run("cover-conformal", "--f", "sin(y)", "--g", "sin(2*y)")
if r:
    check(abs(r["result"]["P"] - 4 * 3.141592653589793) < 1e-12 and abs(r["result"]["certificate"]["a"] - 2) < 1e-7, "cover")

r = run("word-nf", "--generators", "2", "--commute", "0-1", "--word", "0,1,0,1,0,1,0,1")
if r:
    check(r["result"]["normal_form"] == [], "word-nf")

with tempfile.TemporaryDirectory() as d:
    csv = os.path.join(d, "t.csv")
    out = os.path.join(d, "r.json")
    r = run("geodesic", "--f", "4*sin(y)", "--integrals", "1,2,0.5", "--csv", csv, "-o", out)
    with open(out) as fh:
        rep = json.load(fh)
    check(rep["result"]["status"] == "completed", "geodesic status")
    with open(csv) as fh:
        check(fh.readline().strip() == "t,x,y,vx,vy,clairaut,energy", "trajectory CSV header")

    # Same seed, same bytes, regardless of --jobs.
    a, b = os.path.join(d, "a.json"), os.path.join(d, "b.json")
    run("conjugate", "--f", "4*sin(y)", "--samples", "6", "--seed", "9", "--t-max", "10", "-o", a)
    run("conjugate", "--f", "4*sin(y)", "--samples", "6", "--seed", "9", "--t-max", "10", "--jobs", "3", "-o", b)
    with open(a, "rb") as fa, open(b, "rb") as fb:
        check(fa.read() == fb.read(), "conjugate report not deterministic")

    torus = os.path.join(d, "t.json")
    with open(torus, "w") as fh:
        json.dump({"f": {"expr": "4*sin(y)", "period": "2*pi"}, "period": "2*pi", "orbit_length": 1,
                   "twist": 0, "reeb": True}, fh)
    r = run("torus-classify", "--torus", torus)
    if r:
        check(abs(r["result"]["reeb"]["b"]) < 1e-9, "torus b = 0")

r = run("lightlike", "--f", "4*sin(y)")
if r:
    check(abs(r["result"]["horizon"] - 0.5) < 1e-12 and r["result"]["integrator"]["horizon_error"] < 1e-3, "lightlike")

if failures:
    print("\n".join(failures))
    sys.exit(1)
print("cli checks passed")
