"""percrg: percolation and renormalization analysis of gate-grid circuits.

The package models error occurrence in a fault-tolerant circuit as Bernoulli
site percolation on the circuit's interaction graph, and studies how the
error density transforms under block coarse-graining.  Submodules:

    circuit      gate-grid circuits, a small text format, deterministic generators
    graph        interaction graphs, statistics, JSON serialization
    percolation  site configurations, cluster decomposition, Monte Carlo observables
    rgmap        the occupation-density renormalization map and its analysis
    concat       gadget expansion, coarse-graining, renormalization Monte Carlo
    cli          command-line front end

Submodules are imported on demand; keep this namespace light.
"""

from __future__ import annotations

__version__ = "0.1.0"

__all__ = ["__version__"]
