"""Counting problems compiled to structures and sentences, plus brute-force oracles."""
from .oracles import (PROBLEMS, accepted_words, count_branchings, count_census, count_cliques,
                      count_dnf, count_independent_sets, count_sinks, oracle_count)
from .specs import (DnfSpec, GraphSpec, NfaSpec, SpecError, dnf_text, graph_text, nfa_text,
                    parse_dnf, parse_graph, parse_nfa)
from .templates import (clique_condition, compile_dnf, template_census, template_clique,
                        template_is, template_sinks)
from .tm import CompileError, check_preconditions, compile_tm_to_tot, structure_word, word_structure
