"""Pure-Python ristretto255 group arithmetic.

Byte-compatible with the native kernel: points are 32-byte canonical
ristretto255 encodings, scalars are 32-byte little-endian values already
reduced modulo the group order.
"""

from __future__ import annotations

P = 2**255 - 19
L = 2**252 + 27742317777372353535851937790883648493

D = (-121665 * pow(121666, P - 2, P)) % P
D2 = (2 * D) % P
SQRT_M1 = pow(2, (P - 1) // 4, P)


def _is_negative(x: int) -> bool:
    return (x % P) & 1 == 1


def _abs(x: int) -> int:
    x %= P
    return (P - x) % P if x & 1 else x


def _sqrt_ratio_m1(u: int, v: int) -> tuple[bool, int]:
    v3 = v * v % P * v % P
    v7 = v3 * v3 % P * v % P
    r = u * v3 % P * pow(u * v7 % P, (P - 5) // 8, P) % P
    check = v * r % P * r % P
    u %= P
    correct = check == u
    flipped = check == (-u) % P
    flipped_i = check == (-u * SQRT_M1) % P
    if flipped or flipped_i:
        r = r * SQRT_M1 % P
    return correct or flipped, _abs(r)


# sqrt(a*d - 1); the standard constant is the odd (negative) root.
SQRT_AD_MINUS_ONE = (P - _sqrt_ratio_m1((-1 - D) % P, 1)[1]) % P
INVSQRT_A_MINUS_D = _sqrt_ratio_m1(1, (-1 - D) % P)[1]
ONE_MINUS_D_SQ = (1 - D * D) % P
D_MINUS_ONE_SQ = (D - 1) * (D - 1) % P

# Extended twisted Edwards coordinates (X, Y, Z, T) with x = X/Z, y = Y/Z, xy = T/Z.
Point = tuple[int, int, int, int]
IDENTITY: Point = (0, 1, 1, 0)


def _base() -> Point:
    y = 4 * pow(5, P - 2, P) % P
    x2 = (y * y - 1) * pow(D * y * y + 1, P - 2, P) % P
    x = pow(x2, (P + 3) // 8, P)
    if x * x % P != x2:
        x = x * SQRT_M1 % P
    if x & 1:
        x = P - x
    return (x, y, 1, x * y % P)


BASE = _base()


def add(p: Point, q: Point) -> Point:
    x1, y1, z1, t1 = p
    x2, y2, z2, t2 = q
    a = (y1 - x1) * (y2 - x2) % P
    b = (y1 + x1) * (y2 + x2) % P
    c = t1 * D2 % P * t2 % P
    d = 2 * z1 * z2 % P
    e, f, g, h = b - a, d - c, d + c, b + a
    return (e * f % P, g * h % P, f * g % P, e * h % P)


def double(p: Point) -> Point:
    x1, y1, z1, _ = p
    a = x1 * x1 % P
    b = y1 * y1 % P
    c = 2 * z1 * z1 % P
    h = a + b
    e = h - (x1 + y1) * (x1 + y1)
    g = a - b
    f = c + g
    return (e * f % P, g * h % P, f * g % P, e * h % P)


def neg(p: Point) -> Point:
    x, y, z, t = p
    return ((-x) % P, y, z, (-t) % P)


def _table(p: Point) -> list[Point]:
    tbl = [IDENTITY, p]
    for _ in range(14):
        tbl.append(add(tbl[-1], p))
    return tbl


def scalarmult(p: Point, k: int, table: list[Point] | None = None) -> Point:
    tbl = table or _table(p)
    acc = IDENTITY
    for shift in range(252, -4, -4):
        acc = double(double(double(double(acc))))
        nib = (k >> shift) & 0xF
        if nib:
            acc = add(acc, tbl[nib])
    return acc


_BASE_TABLE = _table(BASE)


def decode(b: bytes) -> Point:
    if len(b) != 32:
        raise ValueError("point: expected 32 bytes")
    s = int.from_bytes(b, "little")
    if s >= P or _is_negative(s):
        raise ValueError("point: invalid ristretto255 encoding")
    ss = s * s % P
    u1 = (1 - ss) % P
    u2 = (1 + ss) % P
    u2_sqr = u2 * u2 % P
    v = (-(D * u1 % P * u1) - u2_sqr) % P
    was_square, invsqrt = _sqrt_ratio_m1(1, v * u2_sqr % P)
    den_x = invsqrt * u2 % P
    den_y = invsqrt * den_x % P * v % P
    x = _abs(2 * s * den_x)
    y = u1 * den_y % P
    t = x * y % P
    if not was_square or _is_negative(t) or y == 0:
        raise ValueError("point: invalid ristretto255 encoding")
    return (x, y, 1, t)


def encode(p: Point) -> bytes:
    x0, y0, z0, t0 = p
    u1 = (z0 + y0) * (z0 - y0) % P
    u2 = x0 * y0 % P
    _, invsqrt = _sqrt_ratio_m1(1, u1 * u2 % P * u2 % P)
    den1 = invsqrt * u1 % P
    den2 = invsqrt * u2 % P
    z_inv = den1 * den2 % P * t0 % P
    if _is_negative(t0 * z_inv):
        x, y = y0 * SQRT_M1 % P, x0 * SQRT_M1 % P
        den_inv = den1 * INVSQRT_A_MINUS_D % P
    else:
        x, y, den_inv = x0, y0, den2
    if _is_negative(x * z_inv):
        y = (-y) % P
    s = _abs(den_inv * (z0 - y))
    return s.to_bytes(32, "little")


def _elligator(t: int) -> Point:
    r = SQRT_M1 * t % P * t % P
    u = (r + 1) * ONE_MINUS_D_SQ % P
    v = (-1 - r * D) * (r + D) % P
    was_square, s = _sqrt_ratio_m1(u, v)
    if was_square:
        c = P - 1
    else:
        s = (-_abs(s * t)) % P
        c = r
    n = (c * (r - 1) % P * D_MINUS_ONE_SQ - v) % P
    w0 = 2 * s * v % P
    w1 = n * SQRT_AD_MINUS_ONE % P
    w2 = (1 - s * s) % P
    w3 = (1 + s * s) % P
    return (w0 * w3 % P, w2 * w1 % P, w1 * w3 % P, w0 * w2 % P)


def _scalar(s: bytes) -> int:
    if len(s) != 32:
        raise ValueError("scalar: expected 32 bytes")
    k = int.from_bytes(s, "little")
    if k >= L:
        raise ValueError("scalar: not canonical")
    return k


# -- kernel surface (mirrors the native module) ------------------------------


def r255_basemul(s: bytes) -> bytes:
    return encode(scalarmult(BASE, _scalar(s), _BASE_TABLE))


def r255_mul(p: bytes, s: bytes) -> bytes:
    pt = decode(p)
    return encode(scalarmult(pt, _scalar(s)))


def r255_add(p: bytes, q: bytes) -> bytes:
    return encode(add(decode(p), decode(q)))


def r255_sub(p: bytes, q: bytes) -> bytes:
    return encode(add(decode(p), neg(decode(q))))


def r255_is_valid(p: bytes) -> bool:
    try:
        decode(p)
    except ValueError:
        return False
    return True


def r255_from_uniform(b: bytes) -> bytes:
    if len(b) != 64:
        raise ValueError("from_uniform: expected 64 bytes")
    mask = (1 << 255) - 1
    t1 = (int.from_bytes(b[:32], "little") & mask) % P
    t2 = (int.from_bytes(b[32:], "little") & mask) % P
    return encode(add(_elligator(t1), _elligator(t2)))


def r255_lincomb(points: list[bytes], scalars: list[bytes]) -> bytes:
    if len(points) != len(scalars):
        raise ValueError("lincomb: length mismatch")
    acc = IDENTITY
    for p, s in zip(points, scalars):
        acc = add(acc, scalarmult(decode(p), _scalar(s)))
    return encode(acc)


def elgamal_encrypt_batch(
    pk: bytes, msgs: list[bytes], rands: list[bytes]
) -> list[tuple[bytes, bytes]]:
    if len(msgs) != len(rands):
        raise ValueError("encrypt: length mismatch")
    pkp = decode(pk)
    pk_table = _table(pkp)
    out = []
    for m, r in zip(msgs, rands):
        k = _scalar(r)
        c1 = scalarmult(BASE, k, _BASE_TABLE)
        c2 = add(decode(m), scalarmult(pkp, k, pk_table))
        out.append((encode(c1), encode(c2)))
    return out


def elgamal_reencrypt_batch(
    pk: bytes, cts: list[tuple[bytes, bytes]], rands: list[bytes]
) -> list[tuple[bytes, bytes]]:
    if len(cts) != len(rands):
        raise ValueError("reencrypt: length mismatch")
    pkp = decode(pk)
    pk_table = _table(pkp)
    out = []
    for (a, b), r in zip(cts, rands):
        k = _scalar(r)
        c1 = add(decode(a), scalarmult(BASE, k, _BASE_TABLE))
        c2 = add(decode(b), scalarmult(pkp, k, pk_table))
        out.append((encode(c1), encode(c2)))
    return out
