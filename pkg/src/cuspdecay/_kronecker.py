"""Integer polynomial products by Kronecker substitution.

Signed coefficient lists are packed into one big integer with fixed-width
byte slots, multiplied with GMP and unpacked.  The slot width is chosen from
a bound on the product coefficients, so the round trip is exact.
"""

import gmpy2

__all__ = ["int_convolve", "slot_bytes"]


def slot_bytes(bound_bits):
    # one spare bit for the sign offset
    return (bound_bits + 2 + 7) // 8


def _offset_block(w, n):
    off = 1 << (8 * w - 1)
    return off, int.from_bytes(off.to_bytes(w, "little") * n, "little")


def _pack(coeffs, w):
    off, block = _offset_block(w, len(coeffs))
    data = b"".join((c + off).to_bytes(w, "little") for c in coeffs)
    return int.from_bytes(data, "little") - block


def _unpack(value, w, n):
    off, block = _offset_block(w, n)
    value = (value + block) & ((1 << (8 * w * n)) - 1)
    data = value.to_bytes(w * n, "little")
    return [int.from_bytes(data[i * w:(i + 1) * w], "little") - off for i in range(n)]


def int_convolve(a, b, n):
    """First ``n`` coefficients of the product of two integer sequences."""
    a = list(a[:n])
    b = list(b[:n])
    if not a or not b:
        return [0] * n
    ma = max(abs(c) for c in a).bit_length()
    mb = max(abs(c) for c in b).bit_length()
    if ma == 0 or mb == 0:
        return [0] * n
    if min(len(a), len(b)) <= 8:
        out = [0] * n
        for i, x in enumerate(a):
            if x:
                for j in range(min(len(b), n - i)):
                    out[i + j] += x * b[j]
        return out
    w = slot_bytes(ma + mb + min(len(a), len(b)).bit_length())
    prod = gmpy2.mpz(_pack(a, w)) * gmpy2.mpz(_pack(b, w))
    out = _unpack(int(prod), w, min(n, len(a) + len(b) - 1))
    out.extend([0] * (n - len(out)))
    return out
