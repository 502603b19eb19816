"""Plain-text inspection helpers for emitted CUDA."""

from __future__ import annotations

import re

from irgl import ast


def code_only(text: str) -> str:
    """Text with comments, string literals and char literals blanked."""
    return re.sub(r'//[^\n]*|/\*.*?\*/|"(?:\\.|[^"\\])*"|\'(?:\\.|[^\'\\])*\'', " ", text, flags=re.S)


def balanced(text: str) -> bool:
    pairs = {")": "(", "]": "[", "}": "{"}
    stack = []
    for ch in code_only(text):
        if ch in "([{":
            stack.append(ch)
        elif ch in pairs:
            if not stack or stack.pop() != pairs[ch]:
                return False
    return not stack


def function_block(text: str, signature_start: str) -> str:
    """The brace-delimited body of the first function whose line starts with ``signature_start``."""
    i = text.index(signature_start)
    j = text.index("{", i)
    depth = 0
    for k in range(j, len(text)):
        depth += {"{": 1, "}": -1}.get(text[k], 0)
        if depth == 0:
            return text[i:k + 1]
    raise AssertionError("unbalanced")


def count_nodes(m: ast.Module, cls) -> int:
    return sum(isinstance(s, cls) for k in m.kernels for s in ast.walk_stmts(k.body))
