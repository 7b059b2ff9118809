"""Formula syntax: AST, parser, printer, metrics and fragment classification."""
from .ast import *  # noqa: F401,F403
from .ast import FormulaError, formula_length, free_fo, free_so, validate
from .fragments import (FragmentTag, NormalForm, classify_fragment, lfp_nodes, match_connection_shape,
                        normalize_totp_fo, recognize_define, recognize_extend)
from .parser import ParseError, parse_bool, parse_qformula
from .printer import bool_text, to_text
