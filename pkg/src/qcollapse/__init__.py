"""State-vector experiments on measurement, collapse and constrained rotation.

Modules: ``statevec`` (amplitudes and gates), ``oracle`` (periodic 2-to-1
functions), ``measure`` (Born rule, collapse, post-selection), ``waves``
(retarded/advanced decomposition), ``simon`` (period finding), ``satnet``
(CNF to reversible networks), ``zeno`` (constrained-subspace dynamics) and
``cli``.
"""

__version__ = "0.1.0"
