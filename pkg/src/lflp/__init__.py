"""LF signature checking, translation to hereditary Harrop programs, and
proof search over the translated form.

The pipeline: parse an LF signature, validate it with the kernel, translate
it (naively or with strictness-based premise elimination) into an hohh
program, run inhabitation queries on that program with the embedded engine,
and map answer terms back to LF objects.
"""

__version__ = "0.1.0"
