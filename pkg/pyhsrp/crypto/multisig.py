"""Multi-signature chains for hop-by-hop authenticated control packets.

Entry ``i`` signs ``canonical_bytes || encode(chain[:i])``, so every
signature commits to the packet content and to every earlier hop, in order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..exceptions import DuplicateSigner
from .signatures import KeyDirectory, SignatureScheme


@dataclass(frozen=True, slots=True)
class ChainEntry:
    """One hop's signature."""

    signer: int
    sig: bytes


@dataclass(frozen=True, slots=True)
class MultiSig:
    """Ordered signatures in traversal order."""

    entries: tuple[ChainEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def signers(self) -> tuple[int, ...]:
        return tuple(entry.signer for entry in self.entries)

    def prefix(self, length: int) -> MultiSig:
        return MultiSig(self.entries[:length])


@dataclass(frozen=True, slots=True)
class Valid:
    """Every signature checked out."""

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True, slots=True)
class Invalid:
    """First failing entry."""

    at_index: int

    def __bool__(self) -> bool:
        return False


ChainVerdict = Valid | Invalid


def encode_chain(chain: MultiSig) -> bytes:
    """Serialize a chain: u16 count, then per entry u32 signer, u16 length, bytes."""
    parts = [struct.pack(">H", len(chain.entries))]
    for entry in chain.entries:
        parts.append(struct.pack(">IH", entry.signer, len(entry.sig)))
        parts.append(entry.sig)
    return b"".join(parts)


def decode_chain(data: bytes, offset: int = 0) -> tuple[MultiSig, int]:
    """Parse a chain written by :func:`encode_chain`.

    Returns:
        The chain and the offset just past it
    """
    (count,) = struct.unpack_from(">H", data, offset)
    offset += 2
    entries = []
    for _ in range(count):
        signer, length = struct.unpack_from(">IH", data, offset)
        offset += 6
        entries.append(ChainEntry(signer, bytes(data[offset : offset + length])))
        offset += length
    return MultiSig(tuple(entries)), offset


def _signed_message(canonical_bytes: bytes, chain_so_far: MultiSig) -> bytes:
    return canonical_bytes + encode_chain(chain_so_far)


def multisig_append(
    chain: MultiSig,
    signer: int,
    private_key: bytes,
    canonical_bytes: bytes,
    scheme: SignatureScheme,
    *,
    claimed_signer: int | None = None,
) -> MultiSig:
    """Append ``signer``'s signature over the content and all prior hops.

    ``claimed_signer`` lets an adversary list another node's id while
    signing with its own key; verification then fails at that entry.

    Raises:
        DuplicateSigner: If the listed signer already appears in the chain
    """
    listed = signer if claimed_signer is None else claimed_signer
    if listed in chain.signers:
        raise DuplicateSigner(f"node {listed} already signed this chain")
    sig = scheme.sign(private_key, _signed_message(canonical_bytes, chain))
    return MultiSig((*chain.entries, ChainEntry(listed, sig)))


def multisig_verify(
    chain: MultiSig, directory: KeyDirectory, canonical_bytes: bytes
) -> ChainVerdict:
    """Check every entry in order; report the first failure."""
    seen: set[int] = set()
    for index, entry in enumerate(chain.entries):
        if entry.signer in seen:
            return Invalid(index)
        seen.add(entry.signer)
        message = _signed_message(canonical_bytes, chain.prefix(index))
        if not directory.verify(entry.signer, message, entry.sig):
            return Invalid(index)
    return Valid()
