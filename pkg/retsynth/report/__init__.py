"""html run reports"""

from .build_reports import Report, format_pct, get_table_html, query_dataframe, word_wrap_title

__all__ = ["Report", "format_pct", "get_table_html", "query_dataframe", "word_wrap_title"]
