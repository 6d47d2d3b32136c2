"""graphwip: program-graph edge prediction over well-formed and
work-in-progress code, with relation-aware transformers for code
completion and variable-misuse localization/repair."""

__version__ = "0.1.0"
