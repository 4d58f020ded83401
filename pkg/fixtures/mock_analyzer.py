#!/usr/bin/env python3
"""Mock program analyzer used by the fixture tool manifest.

Scans a logic program for `:- pred Name(Args) : (Call) => Succ.`
assertion lines and reports, deterministically, whether each success
property holds: `var(_)` success properties are reported as failed
assertions (a WARNING block), anything else as verified (`:- true
pred` lines). `%` comments and whitespace variations do not affect the
output. Programs without any assertion are rejected with an ERROR and
exit code 2.
"""

import re
import sys

VERSION = "1.0"

PRED_LINE = re.compile(r"^:-\s*pred\s+(.*)\.\s*$")
HEAD = re.compile(r"^([a-z][A-Za-z0-9_]*)\s*\(\s*(.*?)\s*\)\s*$")
VAR_PROP = re.compile(r"\bvar\s*\(")


def canonical(text):
    """Collapse whitespace and normalize spacing around punctuation."""
    text = " ".join(text.split())
    text = re.sub(r"\s*([(),])\s*", r"\1", text)
    while text.startswith("(") and text.endswith(")") and balanced_wrap(text):
        text = text[1:-1].strip()
    return text


def balanced_wrap(text):
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return i == len(text) - 1
    return False


def parse_assertions(source):
    assertions = []
    for raw in source.split("\n"):
        line = raw.split("%", 1)[0].strip()
        m = PRED_LINE.match(line)
        if not m:
            continue
        body = m.group(1)
        lhs, sep, succ = body.partition("=>")
        if not sep:
            continue
        head_part, sep, call_part = lhs.partition(":")
        if not sep:
            continue
        hm = HEAD.match(head_part.strip())
        if not hm:
            continue
        name = hm.group(1)
        args = canonical(hm.group(2))
        arity = len(args.split(",")) if args else 0
        assertions.append(
            {
                "name": name,
                "arity": arity,
                "args": args,
                "call": canonical(call_part),
                "success": canonical(succ),
            }
        )
    return assertions


def main(argv):
    args = argv[1:]
    if "--version" in args:
        print(VERSION)
        return 0
    paths = [a for a in args if not a.startswith("-") or a == "-"]
    if not paths:
        print("ERROR (mock_analyzer): no input file given.")
        return 2
    try:
        with open(paths[0], encoding="utf-8") as fh:
            source = fh.read()
    except OSError as err:
        print(f"ERROR (mock_analyzer): cannot read input: {err}")
        return 2

    assertions = parse_assertions(source)
    print("{Analyzing program}")
    if not assertions:
        print("ERROR (mock_analyzer): no checkable assertion found in program.")
        return 2
    for a in assertions:
        shown = ":- pred {name}({args}) : ({call}) => ({success}).".format(**a)
        if VAR_PROP.search(a["success"]):
            print(
                "WARNING (ctchecks): assertion for {name}/{arity} "
                "could not be verified:".format(**a)
            )
            print("   " + shown)
            print("   success property {success} does not hold.".format(**a))
        else:
            print(
                ":- true pred {name}({args}) : ({call}) => ({success}).".format(**a)
            )
    print("{Assertion checking}")
    print("Note: %d assertion(s) checked" % len(assertions))
    print("Done.")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
