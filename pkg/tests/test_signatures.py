"""Tests for signatures, the key directory and multi-signature chains."""

from __future__ import annotations

import pytest

from pyhsrp.const import SCHEME_ED25519, SCHEME_KEYED_DIGEST
from pyhsrp.crypto.multisig import (
    ChainEntry,
    Invalid,
    MultiSig,
    Valid,
    decode_chain,
    encode_chain,
    multisig_append,
    multisig_verify,
)
from pyhsrp.crypto.signatures import (
    KeyDirectory,
    KeyedDigestScheme,
    build_directory,
    keygen,
    make_scheme,
    sign,
    verify,
)
from pyhsrp.exceptions import DuplicateNode, DuplicateSigner
from pyhsrp.kernel import fork_stream

MESSAGE = bytes(range(64))


def flip_bit(data: bytes, bit: int) -> bytes:
    raw = bytearray(data)
    raw[bit // 8] ^= 1 << (bit % 8)
    return bytes(raw)


class TestKeyDirectory:
    """Tests for keygen and the directory."""

    def test_keygen_registers(self) -> None:
        """keygen publishes the public key."""
        directory = KeyDirectory(KeyedDigestScheme())
        record = keygen(3, directory, fork_stream(1, "keys/3"))
        assert directory[3] == record.public_key
        assert record.node == 3

    def test_duplicate_node(self) -> None:
        """A node gets one key pair."""
        directory = KeyDirectory(KeyedDigestScheme())
        keygen(1, directory, fork_stream(1, "a"))
        with pytest.raises(DuplicateNode):
            keygen(1, directory, fork_stream(1, "b"))

    def test_frozen_directory(self) -> None:
        """No registrations after freeze."""
        directory, _keys = build_directory(1, 3)
        with pytest.raises(RuntimeError):
            directory.register(9, b"key")

    def test_build_directory_replays(self) -> None:
        """Same seed and node count give the same keys."""
        _dir_a, keys_a = build_directory(42, 5)
        _dir_b, keys_b = build_directory(42, 5)
        assert [k.public_key for k in keys_a] == [k.public_key for k in keys_b]
        assert [k.private_key for k in keys_a] == [k.private_key for k in keys_b]

    def test_private_key_not_in_repr(self) -> None:
        """Key pair reprs never show the secret."""
        _directory, keys = build_directory(1, 1)
        assert keys[0].private_key.hex() not in repr(keys[0])


class TestSignVerify:
    """Tests for single signatures."""

    def test_untampered_verifies(self) -> None:
        """A fresh signature verifies."""
        directory, keys = build_directory(7, 2)
        sig = sign(directory.scheme, keys[0].private_key, MESSAGE)
        assert verify(directory.scheme, keys[0].public_key, MESSAGE, sig)
        assert directory.verify(0, MESSAGE, sig)

    def test_every_single_bit_tamper_fails(self) -> None:
        """All 512 one-bit changes of a 64-byte message are caught."""
        directory, keys = build_directory(7, 1)
        sig = sign(directory.scheme, keys[0].private_key, MESSAGE)
        for bit in range(len(MESSAGE) * 8):
            assert not directory.verify(0, flip_bit(MESSAGE, bit), sig)

    def test_wrong_signer_fails(self) -> None:
        """Another node's key does not verify."""
        directory, keys = build_directory(7, 2)
        sig = sign(directory.scheme, keys[0].private_key, MESSAGE)
        assert not directory.verify(1, MESSAGE, sig)

    def test_unknown_node_fails(self) -> None:
        """Unregistered ids never verify."""
        directory, keys = build_directory(7, 1)
        sig = sign(directory.scheme, keys[0].private_key, MESSAGE)
        assert not directory.verify(99, MESSAGE, sig)


class TestSchemes:
    """Tests for scheme selection and the Ed25519 scheme."""

    def test_make_scheme_default(self) -> None:
        """The keyed digest is registered by name."""
        assert isinstance(make_scheme(SCHEME_KEYED_DIGEST), KeyedDigestScheme)

    def test_make_scheme_unknown(self) -> None:
        """Unknown names are rejected."""
        with pytest.raises(ValueError, match="unknown signature scheme"):
            make_scheme("rsa")

    def test_ed25519_sign_verify(self) -> None:
        """Ed25519 keys replay per seed and catch tampering."""
        pytest.importorskip("cryptography")
        directory, keys = build_directory(7, 2, make_scheme(SCHEME_ED25519))
        _again, replayed = build_directory(7, 2, make_scheme(SCHEME_ED25519))
        assert [k.public_key for k in keys] == [k.public_key for k in replayed]
        sig = sign(directory.scheme, keys[0].private_key, MESSAGE)
        assert len(sig) == 64
        assert sig == sign(directory.scheme, keys[0].private_key, MESSAGE)
        assert directory.verify(0, MESSAGE, sig)
        assert not directory.verify(1, MESSAGE, sig)
        assert not directory.verify(0, flip_bit(MESSAGE, 5), sig)
        assert not directory.verify(0, MESSAGE, sig[:10])

    def test_ed25519_chain(self) -> None:
        """Multi-signature chains work with 64-byte signatures."""
        pytest.importorskip("cryptography")
        directory, keys = build_directory(3, 3, make_scheme(SCHEME_ED25519))
        chain = MultiSig()
        for key in keys:
            chain = multisig_append(chain, key.node, key.private_key, MESSAGE, directory.scheme)
        assert multisig_verify(chain, directory, MESSAGE)
        decoded, _end = decode_chain(encode_chain(chain))
        assert decoded == chain


class TestMultiSig:
    """Tests for multi-signature chains."""

    @pytest.fixture
    def keyed(self) -> tuple[KeyDirectory, list[bytes]]:
        directory, keys = build_directory(11, 4)
        return directory, [k.private_key for k in keys]

    def chain_of(
        self, keyed: tuple[KeyDirectory, list[bytes]], signers: list[int], content: bytes
    ) -> MultiSig:
        directory, secrets = keyed
        chain = MultiSig()
        for signer in signers:
            chain = multisig_append(chain, signer, secrets[signer], content, directory.scheme)
        return chain

    def test_valid_chain(self, keyed: tuple[KeyDirectory, list[bytes]]) -> None:
        """An honest chain verifies."""
        chain = self.chain_of(keyed, [0, 1, 2, 3], MESSAGE)
        assert multisig_verify(chain, keyed[0], MESSAGE) == Valid()
        assert chain.signers == (0, 1, 2, 3)

    def test_empty_chain_valid(self, keyed: tuple[KeyDirectory, list[bytes]]) -> None:
        """No entries, nothing to fail."""
        assert multisig_verify(MultiSig(), keyed[0], MESSAGE)

    def test_content_mutation(self, keyed: tuple[KeyDirectory, list[bytes]]) -> None:
        """Changed content fails at the first entry."""
        chain = self.chain_of(keyed, [0, 1, 2], MESSAGE)
        assert multisig_verify(chain, keyed[0], flip_bit(MESSAGE, 5)) == Invalid(0)

    def test_reorder(self, keyed: tuple[KeyDirectory, list[bytes]]) -> None:
        """Swapping two entries breaks the chain."""
        chain = self.chain_of(keyed, [0, 1, 2], MESSAGE)
        e = chain.entries
        swapped = MultiSig((e[0], e[2], e[1]))
        assert not multisig_verify(swapped, keyed[0], MESSAGE)

    def test_signer_relabel(self, keyed: tuple[KeyDirectory, list[bytes]]) -> None:
        """Claiming another signer id fails at that entry."""
        chain = self.chain_of(keyed, [0, 1, 2], MESSAGE)
        e = chain.entries
        relabelled = MultiSig((e[0], ChainEntry(3, e[1].sig), e[2]))
        assert multisig_verify(relabelled, keyed[0], MESSAGE) == Invalid(1)

    def test_drop_middle_entry(self, keyed: tuple[KeyDirectory, list[bytes]]) -> None:
        """Removing a hop invalidates every later signature."""
        chain = self.chain_of(keyed, [0, 1, 2], MESSAGE)
        e = chain.entries
        assert multisig_verify(MultiSig((e[0], e[2])), keyed[0], MESSAGE) == Invalid(1)

    def test_signature_bit_flip(self, keyed: tuple[KeyDirectory, list[bytes]]) -> None:
        """A corrupted signature is found at its index."""
        chain = self.chain_of(keyed, [0, 1, 2], MESSAGE)
        e = chain.entries
        broken = MultiSig((e[0], e[1], ChainEntry(2, flip_bit(e[2].sig, 0))))
        assert multisig_verify(broken, keyed[0], MESSAGE) == Invalid(2)

    def test_duplicate_signer(self, keyed: tuple[KeyDirectory, list[bytes]]) -> None:
        """A node cannot sign the same chain twice."""
        directory, secrets = keyed
        chain = self.chain_of(keyed, [0, 1], MESSAGE)
        with pytest.raises(DuplicateSigner):
            multisig_append(chain, 1, secrets[1], MESSAGE, directory.scheme)

    def test_masquerade_detected(self, keyed: tuple[KeyDirectory, list[bytes]]) -> None:
        """Listing another id while signing with one's own key fails."""
        directory, secrets = keyed
        chain = multisig_append(
            MultiSig(), 2, secrets[2], MESSAGE, directory.scheme, claimed_signer=0
        )
        assert chain.signers == (0,)
        assert multisig_verify(chain, directory, MESSAGE) == Invalid(0)

    def test_encoding_round_trip(self, keyed: tuple[KeyDirectory, list[bytes]]) -> None:
        """decode_chain reads what encode_chain wrote, and reports the end offset."""
        chain = self.chain_of(keyed, [3, 1], MESSAGE)
        raw = b"xx" + encode_chain(chain) + b"tail"
        decoded, end = decode_chain(raw, 2)
        assert decoded == chain
        assert raw[end:] == b"tail"
