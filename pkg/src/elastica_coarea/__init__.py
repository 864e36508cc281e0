"""p-elastica energies, coarea decompositions and nested level families."""
