"""CUDA C++ code generation."""

from irgl.codegen.emit import EmitContext, EmitOptions, Emitter, emit_module
from irgl.codegen.runtime import HEADER_NAME, RUNTIME_HEADER

__all__ = ["EmitContext", "EmitOptions", "Emitter", "HEADER_NAME", "RUNTIME_HEADER", "emit_module"]
