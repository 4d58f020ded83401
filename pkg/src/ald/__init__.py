"""ald: build and serve hybrid active logic documents.

A site is generated from plain-text sources containing prose, fenced
code cells (runnable programs, queries, exercises) and tool-filter
directives. The static phase runs external tools, projects their
output through filters and emits self-describing HTML pages; the
dynamic phase evaluates reader-edited cells and grades exercises over
a small HTTP protocol.
"""

__version__ = "0.1.0"
