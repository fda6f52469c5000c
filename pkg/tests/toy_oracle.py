"""Independent brute-force oracle over the tiny test curve.

Deliberately implemented from scratch with naive affine arithmetic and no
imports from the package's ec module, so it can arbitrate disagreements.
Curve: y^2 = x^3 + 2x + 2 over F_17, base point (5, 1), order 19.
"""

import hashlib

P = 17
A = 2
B = 2
G = (5, 1)
N = 19


def add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    (x1, y1), (x2, y2) = p1, p2
    if x1 == x2 and (y1 + y2) % P == 0:
        return None
    if p1 == p2:
        lam = (3 * x1 * x1 + A) * pow(2 * y1, P - 2, P) % P
    else:
        lam = (y2 - y1) * pow(x2 - x1, P - 2, P) % P
    x3 = (lam * lam - x1 - x2) % P
    y3 = (lam * (x1 - x3) - y1) % P
    return (x3, y3)


def mul(k, point):
    acc = None
    for _ in range(k % N):
        acc = add(acc, point)
    return acc


# the full group, indexed by scalar: GROUP[k] == k*G
GROUP = [None]
for _k in range(1, N):
    GROUP.append(add(GROUP[-1], G))


def encode_point(point):
    """Compressed SEC1 on the toy field: parity byte + 1-byte x."""
    x, y = point
    return bytes([3 if y % 2 else 2, x])


def sign(sk, z, nonce):
    """Returns (r, s) or None when the nonce degenerates."""
    R = GROUP[nonce % N]
    if R is None:
        return None
    r = R[0] % N
    s = pow(nonce, N - 2, N) * (z % N + r * sk) % N
    if r == 0 or s == 0:
        return None
    return (r, s)


def verify(pk, z, sig):
    r, s = sig
    if not (0 < r < N and 0 < s < N):
        return False
    sinv = pow(s, N - 2, N)
    R = add(mul(z % N * sinv % N, G), mul(r * sinv % N, pk))
    return R is not None and R[0] % N == r


def leak_nonce(shared_point, counter):
    return (
        int.from_bytes(
            hashlib.sha256(encode_point(shared_point) + bytes([counter])).digest(),
            "big",
        )
        % N
    )


def klepto_sign(sk_sender, pk_receiver, z1, z2, k1):
    """Replay the leak-pair schedule for a fixed first nonce."""
    sig1 = sign(sk_sender, z1, k1)
    assert sig1 is not None
    shared = mul(k1, pk_receiver)
    for counter in range(256):
        k2 = leak_nonce(shared, counter)
        if k2 == 0:
            continue
        sig2 = sign(sk_sender, z2, k2)
        if sig2 is not None:
            return sig1, sig2
    raise AssertionError("no usable counter on the toy curve")


def klepto_extract_all(sk_receiver, sig1, sig2, z2):
    """Every candidate key over all (x-candidate, parity, counter) choices."""
    r1, _ = sig1
    r2, s2 = sig2
    candidates = []
    xs = [r1]
    if r1 + N < P:
        xs.append(r1 + N)
    points = []
    for x in xs:
        for y in range(P):
            if (y * y - (x * x * x + A * x + B)) % P == 0:
                points.append((x, y))
    for R1 in points:
        S = mul(sk_receiver, R1)
        if S is None:
            continue
        for counter in range(256):
            k2 = leak_nonce(S, counter)
            if k2 == 0:
                continue
            sk = (s2 * k2 - z2) * pow(r2, N - 2, N) % N
            if sk:
                candidates.append(sk)
    return candidates
