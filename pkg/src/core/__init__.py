# Numerical core: closed form, spectra, regularization and reference solvers
