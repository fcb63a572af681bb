"""Single source of truth for sign and normalization conventions.

Complex derivatives
    d    = d/dx - i d/dy        (written ∂)
    dbar = d/dx + i d/dy        (written ∂̄)
    d dbar = dbar d = Laplacian = d²/dx² + d²/dy²

Operators
    L = ½ (∂̄ + B)(∂ + A) + V = ½ (∂ + A)(∂̄ + B) + U
    H = ½ (∂B - ∂̄A),   U = V - H

Real (Lorentz) gauge
    A = A2 + i A1, B = -conj(A), real potential (a_x, a_y) = (A1, A2),
    covariant derivative D = grad + i a, magnetic field H = -(∂x a_y - ∂y a_x),
    and  -L = -½ D² + ½ H - V.

Symmetric gauge for the mean field Hbar
    phi_lin = -Hbar |z|² / 4,  A_lin = ∂phi = -Hbar zbar / 2,  B_lin = -∂̄phi = Hbar z / 2.

Magnetic translations
    (T_k psi)(z) = exp(i f_k(z)) psi(z + T_k),  f_1 = -Hbar T1 y / 2,  f_2 = Hbar T2 x / 2.
    Bloch sections satisfy T_k psi = exp(i p_k T_k) psi.
"""

#: coefficient in front of the factorized part of L
FACTOR_HALF = 0.5

#: the Laplacian equals ∂∂̄ exactly (no extra factor)
LAPLACIAN_PER_D_DBAR = 1.0

#: constant of the elliptic Liouville equation  Δφ + 32 e^φ = 0  under this Laplacian
LIOUVILLE_CONSTANT = 32.0

SPECTRAL_TOL = 1e-9
SPECIAL_FN_TOL = 1e-12
