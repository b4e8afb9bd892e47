"""Signature schemes and the trusted key directory.

The bundled scheme is a keyed digest: ``sign`` is HMAC-SHA256 under the
node's secret and ``verify`` recomputes it through the scheme's own secret
registry, which plays the trusted key generation center. Simulated nodes
only ever hold their own private key, so in-simulation adversaries cannot
forge another node's signature. :class:`Ed25519Scheme` is a real asymmetric
scheme behind the same :class:`SignatureScheme` protocol; it needs the optional
``cryptography`` dependency.
"""

from __future__ import annotations

import hashlib
import hmac
import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Protocol

from ..const import SCHEME_ED25519, SCHEME_KEYED_DIGEST
from ..exceptions import DuplicateNode
from ..kernel import RandomStream, fork_stream

_LOGGER = logging.getLogger(__name__)

SECRET_BYTES = 32


@dataclass(frozen=True, slots=True)
class KeyPairRecord:
    """Key pair of one node. The private half stays in that node's state."""

    node: int
    public_key: bytes
    private_key: bytes = field(repr=False)


class SignatureScheme(Protocol):
    """Pluggable signature scheme."""

    name: str

    def keygen(self, stream: RandomStream) -> tuple[bytes, bytes]:
        """Return ``(public_key, private_key)``."""
        ...

    def sign(self, private_key: bytes, message: bytes) -> bytes: ...

    def verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool: ...


class KeyedDigestScheme:
    """Deterministic HMAC-SHA256 stand-in for a real signature scheme."""

    name = SCHEME_KEYED_DIGEST

    def __init__(self) -> None:
        self._secrets: dict[bytes, bytes] = {}

    def keygen(self, stream: RandomStream) -> tuple[bytes, bytes]:
        secret = stream.bytes(SECRET_BYTES)
        public = hashlib.sha256(b"pyhsrp-public|" + secret).digest()
        self._secrets[public] = secret
        return public, secret

    def sign(self, private_key: bytes, message: bytes) -> bytes:
        return hmac.new(private_key, message, hashlib.sha256).digest()

    def verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool:
        secret = self._secrets.get(public_key)
        if secret is None:
            return False
        expected = hmac.new(secret, message, hashlib.sha256).digest()
        return hmac.compare_digest(expected, signature)


class Ed25519Scheme:
    """Ed25519 signatures from the ``cryptography`` package.

    Private keys are raw 32-byte seeds drawn from the node's stream, so key
    generation replays per seed like the keyed digest. Ed25519 signing is
    deterministic, which keeps trace digests stable.
    """

    name = SCHEME_ED25519

    def __init__(self) -> None:
        try:
            from cryptography.exceptions import InvalidSignature
            from cryptography.hazmat.primitives.asymmetric import ed25519
        except ImportError as err:
            raise ImportError(
                "the ed25519 signature scheme needs the 'cryptography' package "
                "(pip install pyhsrp[ed25519])"
            ) from err
        self._ed25519 = ed25519
        self._invalid = InvalidSignature

    def keygen(self, stream: RandomStream) -> tuple[bytes, bytes]:
        seed = stream.bytes(SECRET_BYTES)
        private = self._ed25519.Ed25519PrivateKey.from_private_bytes(seed)
        public = private.public_key().public_bytes_raw()
        return public, seed

    def sign(self, private_key: bytes, message: bytes) -> bytes:
        key = self._ed25519.Ed25519PrivateKey.from_private_bytes(private_key)
        signature: bytes = key.sign(message)
        return signature

    def verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool:
        try:
            key = self._ed25519.Ed25519PublicKey.from_public_bytes(public_key)
            key.verify(signature, message)
        except (self._invalid, ValueError):
            return False
        return True


def make_scheme(name: str) -> SignatureScheme:
    """Instantiate the scheme registered under ``name``.

    Raises:
        ValueError: If ``name`` is not a known scheme
    """
    if name == SCHEME_KEYED_DIGEST:
        return KeyedDigestScheme()
    if name == SCHEME_ED25519:
        return Ed25519Scheme()
    raise ValueError(f"unknown signature scheme: {name}")


class KeyDirectory(Mapping[int, bytes]):
    """Node id -> public key, frozen once scenario setup is complete."""

    def __init__(self, scheme: SignatureScheme) -> None:
        self.scheme = scheme
        self._keys: dict[int, bytes] = {}
        self._frozen = False

    def __getitem__(self, node: int) -> bytes:
        return self._keys[node]

    def __iter__(self) -> Iterator[int]:
        return iter(self._keys)

    def __len__(self) -> int:
        return len(self._keys)

    def register(self, node: int, public_key: bytes) -> None:
        """Publish a node's public key.

        Raises:
            DuplicateNode: If the node is already registered
            RuntimeError: If the directory was frozen
        """
        if self._frozen:
            raise RuntimeError("key directory is frozen")
        if node in self._keys:
            raise DuplicateNode(f"node {node} already has a key pair")
        self._keys[node] = public_key

    def freeze(self) -> None:
        self._frozen = True

    def verify(self, node: int, message: bytes, signature: bytes) -> bool:
        """Verify ``signature`` against ``node``'s public key; unknown nodes fail."""
        public_key = self._keys.get(node)
        if public_key is None:
            return False
        return self.scheme.verify(public_key, message, signature)


def keygen(node: int, directory: KeyDirectory, stream: RandomStream) -> KeyPairRecord:
    """Generate and register a deterministic key pair for ``node``.

    Raises:
        DuplicateNode: If ``node`` is already registered
    """
    if node in directory:
        raise DuplicateNode(f"node {node} already has a key pair")
    public, private = directory.scheme.keygen(stream)
    directory.register(node, public)
    _LOGGER.debug("Registered key for node %d (%s)", node, public[:4].hex())
    return KeyPairRecord(node=node, public_key=public, private_key=private)


def sign(scheme: SignatureScheme, private_key: bytes, message: bytes) -> bytes:
    """Sign ``message`` with ``private_key``."""
    return scheme.sign(private_key, message)


def verify(scheme: SignatureScheme, public_key: bytes, message: bytes, signature: bytes) -> bool:
    """Check ``signature`` over ``message`` against ``public_key``."""
    return scheme.verify(public_key, message, signature)


def build_directory(
    master_seed: int, nodes: int, scheme: SignatureScheme | None = None
) -> tuple[KeyDirectory, list[KeyPairRecord]]:
    """Key every node of a run from its own stream and freeze the directory.

    Rebuilding with the same seed and node count yields the same keys, which
    is how trace verification re-checks recorded signatures.
    """
    directory = KeyDirectory(scheme or KeyedDigestScheme())
    records = [
        keygen(node, directory, fork_stream(master_seed, f"keys/{node}")) for node in range(nodes)
    ]
    directory.freeze()
    return directory, records
