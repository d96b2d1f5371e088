"""Smatch scoring, ensemble selection and silver-data distillation for AMR graphs."""

from ._mbse import (  # noqa: F401
    AlignResult,
    AmrGraph,
    AttrValue,
    Attribute,
    Candidate,
    CandidateSet,
    CorpusReadResult,
    DroppedRecord,
    Edge,
    EnsembleDecision,
    GraphInvariantError,
    PairwiseMatrix,
    PenmanParseError,
    SearchConfig,
    SelectionStats,
    SilverRecord,
    SmatchScore,
    ValidationReport,
    align_parser_outputs,
    average_select,
    bleu_tokenize,
    corpus_smatch,
    distill,
    exact_smatch,
    extract_triples,
    greedy_select,
    majority_select,
    pairwise_matrix,
    parse_penman,
    read_corpus_file,
    read_corpus_text,
    run_selection,
    sentence_bleu,
    serialize_penman,
    silver_corpus_to_text,
    silver_to_record,
    smatch_pair,
    transform,
    validate,
    write_corpus_file,
    write_record,
)

__all__ = [name for name in dir() if not name.startswith("_")]
