"""Tiny Encryption Algorithm and counter-mode payload encryption.

Words are read from bytes big-endian. One cycle updates both halves; 32
cycles make one block operation, with DELTA = 0x9E3779B9.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..const import MASK32, TEA_CYCLES, TEA_DELTA

BLOCK_BYTES = 8
COUNTER_BYTES = 8
TRAILER_BYTES = 4
PAD_MARKER = 0x80


@dataclass(frozen=True, slots=True)
class TeaKey:
    """128-bit TEA key as four 32-bit words."""

    k0: int
    k1: int
    k2: int
    k3: int

    def __post_init__(self) -> None:
        for word in (self.k0, self.k1, self.k2, self.k3):
            if not 0 <= word <= MASK32:
                raise ValueError(f"key word out of range: {word:#x}")

    @classmethod
    def from_bytes(cls, raw: bytes) -> TeaKey:
        if len(raw) != 16:
            raise ValueError(f"TEA key must be 16 bytes (got {len(raw)})")
        return cls(*struct.unpack(">4I", raw))

    def to_bytes(self) -> bytes:
        return struct.pack(">4I", self.k0, self.k1, self.k2, self.k3)


@dataclass(frozen=True, slots=True)
class Block64:
    """64-bit block as two 32-bit halves."""

    v0: int
    v1: int

    def __post_init__(self) -> None:
        if not (0 <= self.v0 <= MASK32 and 0 <= self.v1 <= MASK32):
            raise ValueError("block halves must be 32-bit unsigned")

    @classmethod
    def from_bytes(cls, raw: bytes) -> Block64:
        if len(raw) != BLOCK_BYTES:
            raise ValueError(f"block must be 8 bytes (got {len(raw)})")
        return cls(*struct.unpack(">2I", raw))

    def to_bytes(self) -> bytes:
        return struct.pack(">2I", self.v0, self.v1)


class BlockCipher(Protocol):
    """64-bit block cipher plugged into counter-mode payload encryption."""

    def encrypt_block(self, block: Block64) -> Block64: ...

    def decrypt_block(self, block: Block64) -> Block64: ...

    def keystream(self, counters: np.ndarray) -> np.ndarray: ...


def tea_encrypt(block: Block64, key: TeaKey) -> Block64:
    """Encipher one block."""
    v0, v1 = block.v0, block.v1
    k0, k1, k2, k3 = key.k0, key.k1, key.k2, key.k3
    total = 0
    for _ in range(TEA_CYCLES):
        total = (total + TEA_DELTA) & MASK32
        v0 = (v0 + ((((v1 << 4) + k0) ^ (v1 + total) ^ ((v1 >> 5) + k1)) & MASK32)) & MASK32
        v1 = (v1 + ((((v0 << 4) + k2) ^ (v0 + total) ^ ((v0 >> 5) + k3)) & MASK32)) & MASK32
    return Block64(v0, v1)


def tea_decrypt(block: Block64, key: TeaKey) -> Block64:
    """Decipher one block (exact inverse of :func:`tea_encrypt`)."""
    v0, v1 = block.v0, block.v1
    k0, k1, k2, k3 = key.k0, key.k1, key.k2, key.k3
    total = (TEA_DELTA * TEA_CYCLES) & MASK32
    for _ in range(TEA_CYCLES):
        v1 = (v1 - ((((v0 << 4) + k2) ^ (v0 + total) ^ ((v0 >> 5) + k3)) & MASK32)) & MASK32
        v0 = (v0 - ((((v1 << 4) + k0) ^ (v1 + total) ^ ((v1 >> 5) + k1)) & MASK32)) & MASK32
        total = (total - TEA_DELTA) & MASK32
    return Block64(v0, v1)


def tea_encrypt_many(v0: np.ndarray, v1: np.ndarray, key: TeaKey) -> tuple[np.ndarray, np.ndarray]:
    """Encipher many blocks at once; uint32 arrays wrap mod 2**32."""
    v0 = v0.astype(np.uint32, copy=True)
    v1 = v1.astype(np.uint32, copy=True)
    k0, k1, k2, k3 = (np.uint32(k) for k in (key.k0, key.k1, key.k2, key.k3))
    total = 0
    for _ in range(TEA_CYCLES):
        total = (total + TEA_DELTA) & MASK32
        s = np.uint32(total)
        v0 += ((v1 << np.uint32(4)) + k0) ^ (v1 + s) ^ ((v1 >> np.uint32(5)) + k1)
        v1 += ((v0 << np.uint32(4)) + k2) ^ (v0 + s) ^ ((v0 >> np.uint32(5)) + k3)
    return v0, v1


class TeaCipher:
    """TEA bound to one key."""

    def __init__(self, key: TeaKey) -> None:
        self.key = key

    def encrypt_block(self, block: Block64) -> Block64:
        return tea_encrypt(block, self.key)

    def decrypt_block(self, block: Block64) -> Block64:
        return tea_decrypt(block, self.key)

    def keystream(self, counters: np.ndarray) -> np.ndarray:
        """Encipher 64-bit counters and return the keystream as big-endian bytes."""
        counters = counters.astype(np.uint64)
        hi = (counters >> np.uint64(32)).astype(np.uint32)
        lo = (counters & np.uint64(MASK32)).astype(np.uint32)
        out0, out1 = tea_encrypt_many(hi, lo, self.key)
        stream = np.empty((counters.size, 2), dtype=">u4")
        stream[:, 0] = out0
        stream[:, 1] = out1
        return stream.reshape(-1).view(np.uint8)


def _pad(payload: bytes) -> bytes:
    padded = payload + bytes([PAD_MARKER])
    remainder = len(padded) % BLOCK_BYTES
    if remainder:
        padded += bytes(BLOCK_BYTES - remainder)
    return padded


def _xor_keystream(cipher: BlockCipher, counter: int, data: bytes) -> bytes:
    blocks = len(data) // BLOCK_BYTES
    counters = (np.arange(blocks, dtype=np.uint64) + np.uint64(counter)) & np.uint64(
        0xFFFF_FFFF_FFFF_FFFF
    )
    keystream = cipher.keystream(counters)
    return (np.frombuffer(data, dtype=np.uint8) ^ keystream).tobytes()


def encrypt_payload(payload: bytes, key: TeaKey | BlockCipher, counter: int = 0) -> bytes:
    """Encrypt ``payload`` in counter mode.

    Layout: 8-byte initial counter, ciphertext of the padded payload (0x80 then
    zeros up to a multiple of 8), 4-byte big-endian plaintext length.
    """
    cipher = TeaCipher(key) if isinstance(key, TeaKey) else key
    counter &= 0xFFFF_FFFF_FFFF_FFFF
    body = _xor_keystream(cipher, counter, _pad(payload))
    return struct.pack(">Q", counter) + body + struct.pack(">I", len(payload))


def decrypt_payload(ciphertext: bytes, key: TeaKey | BlockCipher) -> bytes:
    """Invert :func:`encrypt_payload`.

    Raises:
        ValueError: If the framing is malformed
    """
    if len(ciphertext) < COUNTER_BYTES + BLOCK_BYTES + TRAILER_BYTES:
        raise ValueError("ciphertext too short")
    body = ciphertext[COUNTER_BYTES:-TRAILER_BYTES]
    if len(body) % BLOCK_BYTES:
        raise ValueError("ciphertext body is not a whole number of blocks")
    cipher = TeaCipher(key) if isinstance(key, TeaKey) else key
    (counter,) = struct.unpack(">Q", ciphertext[:COUNTER_BYTES])
    (length,) = struct.unpack(">I", ciphertext[-TRAILER_BYTES:])
    plain = _xor_keystream(cipher, counter, body)
    if length >= len(plain) or plain[length] != PAD_MARKER or any(plain[length + 1 :]):
        raise ValueError("bad padding")
    return plain[:length]
