"""Domain-specific exceptions.

A single structured exception type is raised by every layer of ebrpca
(model validation, solvers, metrics, the experiment harness). Each error
carries a numeric code so callers can branch on it and the message catalog
can localize it.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import IntEnum
from typing import Any, NoReturn


class ExceptionTyps(IntEnum):
	"""Error categories; the thousands digit of an `ErrorCode`."""

	ModelErrors = 1
	SolverErrors = 2
	HarnessErrors = 3
	MetricErrors = 4


class ErrorCode(IntEnum):
	SHAPE_MISMATCH = 1001
	NON_FINITE_ENTRY = 1002
	NON_POSITIVE_LAMBDA = 1003
	INVALID_OPTIONS = 1004
	INVALID_STATE = 1005

	SINGULAR_SYSTEM = 2001
	NUMERICAL_DEGENERACY = 2002
	MASK_ALL_ONES = 2003
	SVD_FAILURE = 2004
	MAX_ITERATIONS_REACHED = 2005

	CONFIG_ERROR = 3001
	IO_ERROR = 3002

	ZERO_REFERENCE = 4001
	ZERO_MATRIX = 4002

	@property
	def typ(self) -> ExceptionTyps:
		return ExceptionTyps(int(self) // 1000)


@dataclass
class ExceptionNode(Exception):
	"""A structured exception carrying ebrpca error information.

	Fields:
	  typ: error category (ExceptionTyps).
	  code: numeric error code, normally an `ErrorCode` value.
	  message: human readable message describing the error.
	  value: offending value (a lambda, a shape, a config key...).
	  location: where it happened (column index, file path, grid point).
	"""

	typ: ExceptionTyps
	code: int = 0
	message: str = ""
	value: Any = ""
	location: str = ""

	def __post_init__(self) -> None:
		Exception.__init__(self, self.message)

	@property
	def error_code(self) -> ErrorCode | None:
		try:
			return ErrorCode(self.code)
		except ValueError:
			return None

	def to_dict(self) -> dict:
		"""Return a plain-serializable representation of the exception."""
		data = asdict(self)
		data["typ"] = {"name": self.typ.name, "value": int(self.typ)}
		data["value"] = str(self.value) if self.value not in ("", None) else ""
		name = self.error_code
		data["name"] = name.name if name is not None else ""
		return data

	def __str__(self) -> str:  # pragma: no cover - simple formatting
		name = self.error_code
		label = name.name if name is not None else str(self.code)
		parts = [f"{self.typ.name} ({label}, code={self.code})"]
		if self.message:
			parts.append(f"message={self.message}")
		if self.value not in ("", None):
			parts.append(f"value={self.value}")
		if self.location:
			parts.append(f"at={self.location}")
		return "; ".join(parts)

	def localized(self, lang: str = "en") -> str:
		"""Return a localized message if a catalog is available."""
		try:
			from .i18n import MessageCatalog

			return MessageCatalog().format_exception(self, lang=lang)
		except Exception:
			return str(self)


def raise_rpca_error(
	code: ErrorCode,
	*,
	message: str = "",
	value: Any = "",
	location: Any = "",
) -> NoReturn:
	"""Raise an ExceptionNode whose category is derived from `code`."""
	raise ExceptionNode(
		typ=code.typ,
		code=int(code),
		message=message,
		value=value,
		location=str(location) if location not in ("", None) else "",
	)


__all__ = ["ExceptionTyps", "ErrorCode", "ExceptionNode", "raise_rpca_error"]
