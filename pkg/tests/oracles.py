"""Frozen reference values, computed once from closed forms and pasted in.

Each constant records the expression that produced it; the tests compare
package output against these literals, not against re-evaluations that
could share a bug with the code under test.
"""

EULER_GAMMA = 0.5772156649015329

# W(omega_z) = ln(1/(1-z)) + 1
THERMAL_WEHRL = {
    0.0: 1.0,
    0.3: 1.3566749439387324,
    0.6: 1.916290731874155,
    0.9: 3.302585092994046,
}

# W(|n><n|) = n + 1 + ln n! - n psi(n+1)
FOCK_WEHRL = {
    0: 1.0,
    1: 1.5772156649015328,
    2: 1.8475785103630111,
    3: 2.0234064639326537,
}

LN2_PLUS_1 = 1.6931471805599454
TWO_LN2 = 1.3862943611198906

# ||omega_{1/2}||_2 = (1-z)/(1-z^2)^{1/2} at z = 1/2, i.e. 1/sqrt(3)
THERMAL_HALF_SCHATTEN_2 = 0.5773502691896258
# ||Q(omega_{1/2})||_2 = (1-z)^{1/2}/2^{1/2} at z = 1/2
THERMAL_HALF_HUSIMI_2 = 0.5

# integral of Q^2 for |n>: C(2n, n) / 2^{2n+1}
FOCK_HUSIMI_SQUARE = {0: 0.5, 1: 0.25, 2: 0.1875}

# p = 1 supremum q^{-1/q}
P1_SUP = {2.0: 0.7071067811865476, 3.0: 0.6933612743506348}

# argmax and value of (1-z^1.5)^{2/3} / (2^{1/2} (1-z)^{1/2}), 1e-6 grid scan
PQ_15_2_ARGMAX = 0.381966
PQ_15_2_VALUE = 0.7516493722110766


def vacuum_square_series(kappa: float) -> float:
    """Tr (kappa A_kappa(|0><0|))^2 / kappa = 1/(2 - 1/kappa)."""
    return 1.0 / (2.0 - 1.0 / kappa)
