#!/usr/bin/env python3
"""End-to-end tests for the fincat command-line tool."""

import json
import os
import subprocess
import sys
import tempfile

BIN = sys.argv[1]
failures = []


def run(*args, env_extra=None, cwd=None):
    env = dict(os.environ)
    env.pop("FINCAT_MUTATE", None)
    env.pop("FINCAT_LIMITS", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([BIN, *args], capture_output=True, text=True,
                          env=env, cwd=cwd, timeout=120)


def check(name, cond, detail=""):
    status = "ok" if cond else "FAIL"
    print(f"{name}: {status} {detail}")
    if not cond:
        failures.append(name)


TRACE_DOC = {
    "groupoids": {"Y": {"discrete": ["1", "2"]}},
    "kernels": {"K": {"dims": {"y1": "Y", "y2": "Y", "stalks": [[5, 1], [2, 7]]}}},
    "tasks": [{"op": "trace", "kernel": "K"}],
}


def main():
    with tempfile.TemporaryDirectory() as tmp:
        doc = os.path.join(tmp, "trace.json")
        with open(doc, "w") as f:
            json.dump(TRACE_DOC, f)

        # A basic run succeeds and reports the trace dimension.
        r = run("run", doc)
        check("run exit code", r.returncode == 0, f"(rc={r.returncode})")
        check("run reports value", "12" in r.stdout)

        # --json puts canonical JSON on stdout and the table on stderr.
        r = run("run", doc, "--json")
        check("json exit code", r.returncode == 0)
        parsed = None
        try:
            parsed = json.loads(r.stdout)
        except json.JSONDecodeError:
            pass
        check("json parses", parsed is not None)
        check("json status ok", parsed and parsed.get("status") == "ok")

        # Byte determinism across repeats and --parallel.
        again = run("run", doc, "--json").stdout
        par = run("run", doc, "--json", "--parallel").stdout
        check("deterministic output", r.stdout == again and r.stdout == par)
        check("no timing in machine output", "ms" not in r.stdout)

        # Input errors exit 1 and name the offender.
        bad = os.path.join(tmp, "bad.json")
        with open(bad, "w") as f:
            json.dump({"tasks": [{"op": "trace", "kernel": "NOPE"}]}, f)
        r = run("run", bad)
        check("undeclared name exit 1", r.returncode == 1)
        check("undeclared name reported", "NOPE" in r.stdout + r.stderr)
        r = run("run", os.path.join(tmp, "missing.json"))
        check("missing file exit 1", r.returncode == 1)

        # Expectation mismatches exit 2.
        mis = os.path.join(tmp, "mismatch.json")
        with open(mis, "w") as f:
            json.dump({"coeff": {"tropical": 9},
                       "tasks": [{"op": "residuate", "a": "2", "b": "5",
                                  "expect": {"value": "4"}}]}, f)
        r = run("run", mis)
        check("mismatch exit 2", r.returncode == 2, f"(rc={r.returncode})")

        # Limits flag.
        big = os.path.join(tmp, "big.json")
        with open(big, "w") as f:
            json.dump({"groups": {"G": {"symmetric": 3}},
                       "groupoids": {"Y": {"one_point": "G"}},
                       "tasks": [{"op": "pi0", "groupoid": "Y"}]}, f)
        check("within limits", run("run", big).returncode == 0)
        check("limits flag enforced",
              run("run", big, "--limits", "group=4").returncode == 1)
        check("limits env enforced",
              run("run", big, env_extra={"FINCAT_LIMITS": "group=4"}).returncode == 1)

        # Selftest passes clean and is deterministic.
        r = run("selftest", "--corpus-size", "30", "--seed", "7", "--json", cwd=tmp)
        check("selftest exit 0", r.returncode == 0, f"(rc={r.returncode})")
        r2 = run("selftest", "--corpus-size", "30", "--seed", "7", "--json", cwd=tmp)
        check("selftest deterministic", r.stdout == r2.stdout)

        # An injected mutation is caught; the minimized counterexample
        # re-fails under the mutation and passes without it.
        cex = os.path.join(tmp, "cex.json")
        r = run("selftest", "--corpus-size", "30", "--seed", "7",
                "--counterexample", cex,
                env_extra={"FINCAT_MUTATE": "flip_residuation"})
        check("mutation caught", r.returncode != 0, f"(rc={r.returncode})")
        check("counterexample written", os.path.exists(cex))
        if os.path.exists(cex):
            r = run("run", cex, env_extra={"FINCAT_MUTATE": "flip_residuation"})
            check("counterexample re-fails", r.returncode != 0)
            r = run("run", cex)
            check("counterexample passes clean", r.returncode == 0,
                  f"(rc={r.returncode})")

        # The second mutation hook is also live.
        r = run("selftest", "--corpus-size", "30", "--seed", "7",
                "--counterexample", os.path.join(tmp, "cex2.json"),
                env_extra={"FINCAT_MUTATE": "swap_convolution"})
        check("swap_convolution caught", r.returncode != 0, f"(rc={r.returncode})")

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
