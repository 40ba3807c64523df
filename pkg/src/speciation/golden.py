"""Reference values used by ``check`` and the acceptance tests."""

# Tris-borate at C_T = 0.2.  Columns: C_B, pH, pH_a, pH_I0, I, gamma.
TRIS_BORATE_C_T = 0.2
TRIS_BORATE_ROWS = (
    (0.10, 8.6778, 8.7448, 8.7444, 1.731e-2, 0.8570),
    (0.12, 8.5785, 8.6453, 8.5783, 1.719e-2, 0.8574),
    (0.14, 8.4782, 8.5435, 8.4766, 1.641e-2, 0.8605),
    (0.16, 8.3735, 8.4361, 8.3706, 1.510e-2, 0.8657),
    (0.18, 8.2651, 8.3244, 8.2614, 1.353e-2, 0.8724),
    (0.20, 8.1620, 8.2180, 8.1583, 1.210e-2, 0.8789),
    (0.22, 8.0748, 8.1284, 8.0719, 1.109e-2, 0.8838),
    (0.24, 8.0058, 8.0579, 8.0039, 1.047e-2, 0.8869),
    (0.26, 7.9512, 8.0024, 7.9500, 1.010e-2, 0.8887),
    (0.28, 7.9067, 7.9574, 7.9060, 0.989e-2, 0.8899),
    (0.30, 7.8693, 7.9196, 7.8689, 0.977e-2, 0.8905),
)
# Rows whose pH_I0 entry is inconsistent with the rest of the column.
TRIS_BORATE_SUSPECT_PH_I0 = (0.10,)

TRIS_BORATE_TOL = {"pH": 5e-3, "pH_a": 5e-3, "pH_I0": 5e-3, "I": 2e-4, "gamma": 1e-3}

# Acid/base pair, pKa = 9.29, pKb = 7.98.  Keys are (a, b).
ACID_BASE_CORRECTED = {
    (0.1, 0.2): {"pH": 8.739, "I": 0.029653, "gamma": 0.817142, "pKa": 9.114595},
    (0.1, 0.1): {"pH": 8.562, "I": 0.020767, "gamma": 0.844513, "pKa": 9.143213},
    (0.2, 0.1): {"pH": 8.355, "I": 0.029650, "gamma": 0.817151, "pKa": 9.114605},
}
ACID_BASE_IDEAL = {(0.1, 0.2): 8.819, (0.1, 0.1): 8.635, (0.2, 0.1): 8.451}

ACID_BASE_TOL = {"pH": 2e-3, "I": 5e-4, "gamma": 1e-3, "pKa": 1e-4, "ideal_pH": 1e-3}

# Polynomial fits of pH_a against C_B at C_T = 0.3 over 100 points.
FIT_C_T = 0.3
FIT_POINTS = 100
FIT_LINEAR = {"coefficients": (9.299, -3.694), "sigma": 0.0084, "max0": 0.015}
FIT_QUADRATIC = {"coefficients": (9.206, -2.672, -2.555), "max0": 0.0097}

PH_A_RANGE = (7.7, 8.9)
GRID_RANGE = (0.1, 0.3)
