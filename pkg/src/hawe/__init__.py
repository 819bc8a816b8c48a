"""Structural node embeddings for heterogeneous networks.

Nodes are embedded by the distribution of anonymized random walks around
them: walks are mapped to position/type token strings, collected into
per-node token sequences, and fed to a paragraph-vector style trainer with
hierarchical softmax.  Exact enumeration oracles, synthetic graph
generators, a typed WL role oracle and an evaluation harness round out the
package.
"""

__version__ = "0.1.0"

from .graph import (HeteroGraph, RoleLabeling, GraphFormatError, from_edge_list,
                    gen_ba, gen_er, gen_pinwheel, load_graph, save_graph, wl_roles)
from .walks import (MODES, Chaw, EnumerationBudgetError, anonymize, aw_token, bell,
                    chaw_token, count_haws, enumerate_aws, exact_walk_distribution,
                    haw_token, sample_walk, to_chaw, to_haw, walk_token)
from .corpus import (Corpus, CorpusFormatError, Lexicon, build_corpus, load_corpus,
                     save_corpus, export_corpus_tsv)
from .model import (EmbeddingModel, HuffmanTree, TrainConfig, build_huffman,
                    corpus_log_likelihood, export_embeddings, grad_check,
                    init_model, load_embeddings, score, train, window_log_prob)
from .evaluate import (EvalReport, NeighborList, PipelineConfig, bench_runtime,
                       classify, nn_accuracy, run_pipeline, sweep, topk_search)
from .backend import active_backend

__all__ = [name for name in dir() if not name.startswith("_")]
