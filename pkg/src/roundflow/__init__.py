"""roundflow: round-handle calculus for non-singular 4-flows.

Core layers:

* ``manifolds`` -- symbolic boundary 3-manifolds (normal forms, homology,
  E-irreducibility);
* ``flows`` -- combinatorial flow data, dynamic order, handle inequalities;
* ``surgery`` -- backward torus-surgery rewriting and its exhaustive
  certification;
* ``filtration`` -- staged 4-manifold assembly and the classification
  pipeline;
* ``service``/``cli`` -- the HTTP surface and its thin command-line client.
"""

__version__ = "0.1.0"
