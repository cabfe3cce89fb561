"""Rewrites a clingo transcript in the output format of DLV.

DLV prints each answer set as `{l1, l2, ...}`; for programs with weak
constraints it prints only best models, each as `Best model: {...}` followed
by `Cost ([Weight:Level]): <[w:l],...>`. The optional argument caps the
number of answer sets, like DLV's -n.
"""
import re
import sys


def main():
    cap = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    lines = sys.stdin.read().splitlines()
    models = []
    i = 0
    while i < len(lines):
        if lines[i].startswith("Answer:"):
            atoms = lines[i + 1].split() if i + 1 < len(lines) else []
            cost = None
            if i + 2 < len(lines) and lines[i + 2].startswith("Optimization:"):
                cost = [int(v) for v in lines[i + 2].split()[1:]]
            models.append((atoms, cost))
        i += 1
    weak = any(c is not None for _, c in models)
    levels = []
    for line in lines:
        m = re.match(r"^% levels: (.*)$", line)
        if m:
            levels = [int(v) for v in m.group(1).split()]
    out = []
    if weak:
        best = min(c for _, c in models)
        seen = set()
        for atoms, c in models:
            key = tuple(sorted(atoms))
            if c != best or key in seen:
                continue
            seen.add(key)
            lv = levels or list(range(len(c), 0, -1))
            pairs = sorted(zip(lv, c))
            cost = ",".join(f"[{w}:{l}]" for l, w in pairs)
            out.append("Best model: {" + ", ".join(atoms) + "}")
            out.append(f"Cost ([Weight:Level]): <{cost}>")
    else:
        for atoms, _ in models:
            out.append("{" + ", ".join(atoms) + "}")
    if cap:
        per = 2 if weak else 1
        out = out[: cap * per]
    print("DLV [build BEN/Dec 21 2011   gcc 4.6.1]")
    print()
    for line in out:
        print(line)
        if not weak:
            print()


main()
