"""Cross-cutting helpers: logging facade, component registry, matrix files."""
from .logging_facade import (
	InMemoryLogHandler,
	clear_message_stack,
	configure_i18n,
	configure_logging,
	get_logger,
	get_message_stack,
	print_error,
	print_message,
	print_translated_error,
)
from .registry import Registry, registry

__all__ = [
	"InMemoryLogHandler",
	"Registry",
	"clear_message_stack",
	"configure_i18n",
	"configure_logging",
	"get_logger",
	"get_message_stack",
	"print_error",
	"print_message",
	"print_translated_error",
	"registry",
]
