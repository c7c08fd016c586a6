"""spanembed: desk-scale machinery for embedding bounded-degree oriented
spanning trees in dense oriented graphs.

Submodules
----------
digraph    digraph container, text format, generators, exact alternating-path DP
expansion  robust expansion diagnostics, cherry property, pair densities
walks      pattern-driven random walks, exact distribution propagation, mixing
trees      rooted oriented trees, splitting, collections, admissible partitions
cover      matching decompositions and spanning regular covers
assign     reduced models, semi-random assignment, traverses, balancing
embed      exact and greedy embedding oracles, synthetic blow-up hosts
pipeline   end-to-end harness and desk-scale theorem checks
cli        command-line interface
"""

from . import digraph, expansion, walks, trees, cover, assign, embed, pipeline

__all__ = ["digraph", "expansion", "walks", "trees", "cover", "assign",
           "embed", "pipeline"]
__version__ = "0.1.0"
