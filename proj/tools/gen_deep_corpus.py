#!/usr/bin/env python3
"""Generates the deep-call corpus: a chain of levels, each calling three
functions (two branching helpers and the next level), with a use-after-free
seeded in the deepest level."""

import argparse
import json
import pathlib

VARIANTS = [
    # (depth, trigger constant, reallocate with another record before the use)
    (12, 7, True),
    (13, 3, False),
    (14, 11, True),
    (15, 5, False),
    (16, 9, True),
]


def program(depth: int, trigger: int, realloc: bool) -> tuple[str, int]:
    lines = [
        f"// Deep call chain: {depth} levels, fan-out 3, use-after-free at the bottom.",
        "record Node { val: int; next: Ref(Node); }",
        "record Msg { a: int; b: int; }",
        "",
    ]
    for level in range(1, depth + 1):
        for j in range(2):
            k = level * 2 + j
            lines += [
                f"fn h{level}_{j}(k: int) -> int {{",
                "  let v: int = input();",
                "  if (v < k) {",
                "    return k;",
                "  }",
                "  if (v > k + 3) {",
                "    return k;",
                "  }",
                "  return k;",
                "}",
                "",
            ]
    use_line = 0
    for level in range(depth, 0, -1):
        lines.append(f"fn level{level}(x: int, n: Ref(Node)) -> int {{")
        lines.append(f"  let a: int = h{level}_0({level});")
        lines.append(f"  let b: int = h{level}_1(a);")
        if level == depth:
            lines += [
                f"  if (x == {trigger}) {{",
                "    free(n);",
                "  }",
            ]
            if realloc:
                lines.append("  let m: Ref(Msg) = alloc(Msg);")
                lines.append("  m->a = b;")
            lines.append("  let v: int = n->val;")
            use_line = len(lines)
            if realloc:
                lines.append("  free(m);")
            lines.append("  return v + b;")
        else:
            lines.append(f"  let r: int = level{level + 1}(x, n);")
            lines.append("  return r + b;")
        lines += ["}", ""]
    lines += [
        "fn main() {",
        "  let x: int = input();",
        "  let n: Ref(Node) = alloc(Node);",
        "  n->val = x;",
        "  let r: int = level1(x, n);",
        f"  if (x != {trigger}) {{",
        "    free(n);",
        "  }",
        "}",
    ]
    return "\n".join(lines) + "\n", use_line


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=pathlib.Path, help="corpus directory")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for depth, trigger, realloc in VARIANTS:
        src, line = program(depth, trigger, realloc)
        stem = f"deep_d{depth}"
        (args.out / f"{stem}.minc").write_text(src)
        sidecar = {"expected": [{"cwe": "CWE-416", "line": line}], "leaks": 0}
        (args.out / f"{stem}.expect.json").write_text(json.dumps(sidecar) + "\n")


if __name__ == "__main__":
    main()
