"""Tool registry, schema-validated dispatch, traces and transports."""

from .server import make_server, serve_stdio
from .service import ReplayMismatch, SandboxService, ToolCall, ToolResult, TraceRecord, load_trace, replay_trace
from .tools import ToolDescriptor, ToolRegistry, default_registry

__all__ = [
    "ReplayMismatch",
    "SandboxService",
    "ToolCall",
    "ToolDescriptor",
    "ToolRegistry",
    "ToolResult",
    "TraceRecord",
    "default_registry",
    "load_trace",
    "make_server",
    "replay_trace",
    "serve_stdio",
]
