"""Quantitative second-order counting logics over finite ordered structures."""
