"""Package holding localization XML resources.

Message catalogs (`en.xml`, `de.xml`) are read by `ebrpca.domain.i18n`
through importlib.resources; keep only resource files here.
"""

__all__ = []
