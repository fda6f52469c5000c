"""Short-Weierstrass elliptic curve arithmetic over prime fields.

Points are affine ``(x, y)`` tuples; the group identity is ``None``.
Two curves are provided: secp256k1 for production use and a tiny
exhaustively-enumerable curve (order 19 over F_17) for oracle testing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

try:  # gmpy2 speeds 256-bit modular arithmetic up ~3x; plain ints work too
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover
    _mpz = int

Point = "tuple[int, int] | None"


@dataclass(frozen=True)
class CurveParams:
    name: str
    p: int
    a: int
    b: int
    gx: int
    gy: int
    n: int
    h: int
    # lazy fixed-base window table, keyed off this instance
    _g_table: list = field(default_factory=list, repr=False, compare=False)

    @property
    def G(self):
        return (self.gx, self.gy)

    @property
    def field_bytes(self) -> int:
        return (self.p.bit_length() + 7) // 8


SECP256K1 = CurveParams(
    name="secp256k1",
    p=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F,
    a=0,
    b=7,
    gx=0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
    gy=0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8,
    n=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141,
    h=1,
)

# y^2 = x^3 + 2x + 2 over F_17, |G| = 19: small enough to enumerate fully.
TOYCURVE = CurveParams(name="toy17", p=17, a=2, b=2, gx=5, gy=1, n=19, h=1)


def on_curve(curve: CurveParams, point) -> bool:
    if point is None:
        return True
    x, y = point
    return (y * y - (x * x * x + curve.a * x + curve.b)) % curve.p == 0


def negate(curve: CurveParams, point):
    if point is None:
        return None
    x, y = point
    return (x, (-y) % curve.p)


def add(curve: CurveParams, p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    p = curve.p
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + curve.a) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return (x3, y3)


def _jac_double(p, a, P):
    X, Y, Z = P
    if not Y:
        return (0, 1, 0)
    S = 4 * X * Y * Y % p
    M = (3 * X * X + a * Z * Z * Z * Z) % p
    X3 = (M * M - 2 * S) % p
    Y3 = (M * (S - X3) - 8 * Y * Y * Y * Y) % p
    Z3 = 2 * Y * Z % p
    return (X3, Y3, Z3)


def _jac_add(p, a, P, Q):
    if not P[2]:
        return Q
    if not Q[2]:
        return P
    X1, Y1, Z1 = P
    X2, Y2, Z2 = Q
    Z1Z1 = Z1 * Z1 % p
    Z2Z2 = Z2 * Z2 % p
    U1 = X1 * Z2Z2 % p
    U2 = X2 * Z1Z1 % p
    S1 = Y1 * Z2 * Z2Z2 % p
    S2 = Y2 * Z1 * Z1Z1 % p
    if U1 == U2:
        if S1 != S2:
            return (0, 1, 0)
        return _jac_double(p, a, P)
    H = (U2 - U1) % p
    R = (S2 - S1) % p
    H2 = H * H % p
    H3 = H * H2 % p
    X3 = (R * R - H3 - 2 * U1 * H2) % p
    Y3 = (R * (U1 * H2 - X3) - S1 * H3) % p
    Z3 = H * Z1 * Z2 % p
    return (X3, Y3, Z3)


def _jac_from_affine(point):
    if point is None:
        return (_mpz(0), _mpz(1), _mpz(0))
    return (_mpz(point[0]), _mpz(point[1]), _mpz(1))


def _jac_to_affine(p, P):
    X, Y, Z = P
    if not Z:
        return None
    zinv = pow(Z, -1, p)
    z2 = zinv * zinv % p
    return (int(X * z2 % p), int(Y * z2 * zinv % p))


def mul(curve: CurveParams, k: int, point):
    """Scalar multiplication k*point (Jacobian double-and-add)."""
    k %= curve.n
    if k == 0 or point is None:
        return None
    p, a = _mpz(curve.p), _mpz(curve.a)
    acc = _jac_from_affine(None)
    base = _jac_from_affine(point)
    while k:
        if k & 1:
            acc = _jac_add(p, a, acc, base)
        base = _jac_double(p, a, base)
        k >>= 1
    return _jac_to_affine(p, acc)


_WINDOW = 4


def _g_window_table(curve: CurveParams):
    """Precomputed table[i][w] = (w << (4*i)) * G, built once per curve."""
    if not curve._g_table:
        windows = (curve.n.bit_length() + _WINDOW - 1) // _WINDOW
        base = curve.G
        for _ in range(windows):
            row = [None]
            acc = None
            for _ in range((1 << _WINDOW) - 1):
                acc = add(curve, acc, base)
                row.append(acc)
            curve._g_table.append(row)
            base = row[1]
            for _ in range(_WINDOW):
                base = add(curve, base, base)
    return curve._g_table


def mul_g(curve: CurveParams, k: int):
    """Fixed-base scalar multiplication k*G using the window table."""
    k %= curve.n
    if k == 0:
        return None
    table = _g_window_table(curve)
    p, a = _mpz(curve.p), _mpz(curve.a)
    acc = _jac_from_affine(None)
    i = 0
    while k:
        w = k & ((1 << _WINDOW) - 1)
        if w:
            acc = _jac_add(p, a, acc, _jac_from_affine(table[i][w]))
        k >>= _WINDOW
        i += 1
    return _jac_to_affine(p, acc)


def lift_x(curve: CurveParams, x: int):
    """Both points with the given x-coordinate, (even_y, odd_y), or None."""
    p = curve.p
    if not 0 <= x < p:
        return None
    rhs = (x * x * x + curve.a * x + curve.b) % p
    # both curves have p = 3 (mod 4)
    y = pow(rhs, (p + 1) // 4, p)
    if y * y % p != rhs:
        return None
    if y % 2:
        return ((x, p - y), (x, y))
    return ((x, y), (x, (p - y) % p))


def point_encode(curve: CurveParams, point) -> bytes:
    """Compressed SEC1: parity byte plus big-endian x."""
    if point is None:
        raise ValueError("cannot encode the identity point")
    x, y = point
    prefix = b"\x03" if y % 2 else b"\x02"
    return prefix + x.to_bytes(curve.field_bytes, "big")


def point_decode(curve: CurveParams, data: bytes):
    if len(data) != 1 + curve.field_bytes or data[0] not in (2, 3):
        raise ValueError("not a compressed SEC1 point")
    x = int.from_bytes(data[1:], "big")
    pair = lift_x(curve, x)
    if pair is None:
        raise ValueError("x-coordinate not on curve")
    even, odd = pair
    return odd if data[0] == 3 else even


def enumerate_group(curve: CurveParams):
    """All points k*G for k in [0, n): identity first.  Toy curves only."""
    points = [None]
    acc = None
    for _ in range(curve.n - 1):
        acc = add(curve, acc, curve.G)
        points.append(acc)
    return points
