# Distributional beam solver
