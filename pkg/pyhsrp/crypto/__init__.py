"""Cipher, signature and multi-signature primitives."""

from .multisig import (
    ChainEntry,
    ChainVerdict,
    Invalid,
    MultiSig,
    Valid,
    decode_chain,
    encode_chain,
    multisig_append,
    multisig_verify,
)
from .signatures import (
    Ed25519Scheme,
    KeyDirectory,
    KeyedDigestScheme,
    KeyPairRecord,
    SignatureScheme,
    build_directory,
    keygen,
    make_scheme,
    sign,
    verify,
)
from .tea import (
    Block64,
    BlockCipher,
    TeaCipher,
    TeaKey,
    decrypt_payload,
    encrypt_payload,
    tea_decrypt,
    tea_encrypt,
)

__all__ = [
    "Block64",
    "BlockCipher",
    "ChainEntry",
    "ChainVerdict",
    "Ed25519Scheme",
    "Invalid",
    "KeyDirectory",
    "KeyPairRecord",
    "KeyedDigestScheme",
    "MultiSig",
    "SignatureScheme",
    "TeaCipher",
    "TeaKey",
    "Valid",
    "build_directory",
    "decode_chain",
    "decrypt_payload",
    "encode_chain",
    "encrypt_payload",
    "keygen",
    "make_scheme",
    "multisig_append",
    "multisig_verify",
    "sign",
    "tea_decrypt",
    "tea_encrypt",
    "verify",
]
