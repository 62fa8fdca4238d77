"""Pairwise secure links and session-key wrapping.

Key exchange and the symmetric cipher are pluggable. Two exchanges ship:

* :class:`HashExchange` ("test-double"): a public token is a hash of the
  private value, and the link key hashes the two tokens in canonical order.
  Cheap and byte-reproducible under a seed; not secure.
* :class:`FiniteFieldDH` ("finite-field"): Diffie-Hellman over the 2048-bit
  MODP group of RFC 3526.

The cipher is a deterministic authenticated construction from SHA-256 and
HMAC (:class:`HashSIVCipher`), so a wrong key is always detected.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field
from typing import Protocol

from .errors import DecryptionError, LinkError, PreconditionError
from .net_model import Edge, NodeId, edge
from .rng import Rng

SESSION_KEY_BYTES = 32


class KeyExchange(Protocol):
    name: str

    def keypair(self, rng: Rng) -> tuple[bytes, bytes]:
        """Return ``(private, public)``."""

    def shared(self, private: bytes, peer_public: bytes) -> bytes:
        """Link key from one's own private value and the peer's public token."""


class SymmetricCipher(Protocol):
    name: str

    def encrypt(self, key: bytes, plaintext: bytes) -> bytes: ...

    def decrypt(self, key: bytes, ciphertext: bytes) -> bytes: ...


class HashExchange:
    name = "test-double"

    def keypair(self, rng: Rng) -> tuple[bytes, bytes]:
        private = rng.bytes(32)
        return private, self._public(private)

    @staticmethod
    def _public(private: bytes) -> bytes:
        return hashlib.sha256(b"hsk-pub" + private).digest()

    def shared(self, private: bytes, peer_public: bytes) -> bytes:
        if len(peer_public) != 32:
            raise LinkError("malformed public token")
        lo, hi = sorted((self._public(private), peer_public))
        return hashlib.sha256(b"hsk-link" + lo + hi).digest()


# RFC 3526, group 14.
MODP_2048 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)


class FiniteFieldDH:
    name = "finite-field"

    def __init__(self, p: int = MODP_2048, g: int = 2, exponent_bits: int = 256):
        self.p, self.g, self.exponent_bits = p, g, exponent_bits
        self._width = (p.bit_length() + 7) // 8

    def keypair(self, rng: Rng) -> tuple[bytes, bytes]:
        x = int.from_bytes(rng.bytes(self.exponent_bits // 8), "big") | 1 << (self.exponent_bits - 1)
        return x.to_bytes(self.exponent_bits // 8, "big"), pow(self.g, x, self.p).to_bytes(self._width, "big")

    def shared(self, private: bytes, peer_public: bytes) -> bytes:
        y = int.from_bytes(peer_public, "big")
        if not 2 <= y <= self.p - 2:
            raise LinkError("peer public value outside [2, p-2]")
        z = pow(y, int.from_bytes(private, "big"), self.p)
        return hashlib.sha256(z.to_bytes(self._width, "big")).digest()


class HashSIVCipher:
    """Deterministic authenticated encryption: ``siv || (plaintext XOR stream)``.

    ``siv = HMAC(key, plaintext)[:16]`` doubles as the authentication tag.
    """

    name = "hash-siv"
    _TAG = 16

    @staticmethod
    def _stream(key: bytes, siv: bytes, n: int) -> bytes:
        out = bytearray()
        counter = 0
        while len(out) < n:
            out += hashlib.sha256(key + siv + counter.to_bytes(8, "big")).digest()
            counter += 1
        return bytes(out[:n])

    def encrypt(self, key: bytes, plaintext: bytes) -> bytes:
        siv = hmac.new(key, plaintext, hashlib.sha256).digest()[: self._TAG]
        body = bytes(a ^ b for a, b in zip(plaintext, self._stream(key, siv, len(plaintext))))
        return siv + body

    def decrypt(self, key: bytes, ciphertext: bytes) -> bytes:
        if len(ciphertext) < self._TAG:
            raise DecryptionError("ciphertext too short")
        siv, body = ciphertext[: self._TAG], ciphertext[self._TAG:]
        plaintext = bytes(a ^ b for a, b in zip(body, self._stream(key, siv, len(body))))
        if not hmac.compare_digest(hmac.new(key, plaintext, hashlib.sha256).digest()[: self._TAG], siv):
            raise DecryptionError("authentication failed")
        return plaintext


PRIMITIVES = {HashExchange.name: HashExchange, FiniteFieldDH.name: FiniteFieldDH}


def key_exchange(name: str) -> KeyExchange:
    try:
        return PRIMITIVES[name]()
    except KeyError:
        raise ValueError(f"unknown key exchange {name!r}; choose from {sorted(PRIMITIVES)}") from None


@dataclass(frozen=True)
class LinkRecord:
    key: bytes
    round_established: int


@dataclass
class LinkDelta:
    new_exchanges: int = 0
    reused_links: int = 0
    pruned: int = 0

    def __iadd__(self, other: "LinkDelta") -> "LinkDelta":
        self.new_exchanges += other.new_exchanges
        self.reused_links += other.reused_links
        self.pruned += other.pruned
        return self


@dataclass
class SecureLinkStore:
    links: dict[Edge, LinkRecord] = field(default_factory=dict)

    def __contains__(self, e) -> bool:
        return edge(*e) in self.links

    def __len__(self):
        return len(self.links)

    def key(self, a: NodeId, b: NodeId) -> bytes:
        return self.links[edge(a, b)].key

    def edges(self) -> frozenset[Edge]:
        return frozenset(self.links)

    def keys_of(self, node: NodeId) -> dict[Edge, bytes]:
        return {e: r.key for e, r in self.links.items() if node in e}

    def copy(self) -> "SecureLinkStore":
        return SecureLinkStore(dict(self.links))


@dataclass(frozen=True)
class SessionKey:
    key: bytes
    epoch: int

    @classmethod
    def generate(cls, rng: Rng, epoch: int, length: int = SESSION_KEY_BYTES) -> "SessionKey":
        return cls(rng.bytes(length), epoch)


def establish_link(
    a: NodeId, b: NodeId, kx: KeyExchange, store: SecureLinkStore, rng: Rng,
    round_index: int = 0, delta: LinkDelta | None = None,
) -> bytes:
    if a == b:
        raise PreconditionError("a secure link needs two distinct nodes")
    delta = delta if delta is not None else LinkDelta()
    e = edge(a, b)
    if e in store.links:
        delta.reused_links += 1
        return store.links[e].key
    priv_a, pub_a = kx.keypair(rng)
    priv_b, pub_b = kx.keypair(rng)
    k_a, k_b = kx.shared(priv_a, pub_b), kx.shared(priv_b, pub_a)
    if k_a != k_b:
        raise LinkError(f"endpoints of {e} derived different keys")
    store.links[e] = LinkRecord(k_a, round_index)
    delta.new_exchanges += 1
    return k_a


def establish_links_for_tree(
    tree, store: SecureLinkStore, kx: KeyExchange, rng: Rng, round_index: int = 0
) -> LinkDelta:
    """Key every edge of ``tree`` (or any graph with ``edges``); existing links are reused.

    The exchanges happen in one logical round; they are run in sorted edge order
    so the random stream is consumed reproducibly.
    """
    delta = LinkDelta()
    for a, b in sorted(tree.edges):
        establish_link(a, b, kx, store, rng, round_index, delta)
    return delta


def prune_links(store: SecureLinkStore, departed, current_edges) -> LinkDelta:
    departed = set(departed)
    current = {edge(*e) for e in current_edges}
    doomed = [e for e in store.links if e[0] in departed or e[1] in departed or e not in current]
    for e in doomed:
        del store.links[e]
    return LinkDelta(pruned=len(doomed))


def wrap_session_key(sk: SessionKey, link_key: bytes, cipher: SymmetricCipher) -> bytes:
    return cipher.encrypt(link_key, sk.epoch.to_bytes(8, "big") + sk.key)


def unwrap_session_key(ciphertext: bytes, link_key: bytes, cipher: SymmetricCipher) -> SessionKey:
    raw = cipher.decrypt(link_key, ciphertext)
    return SessionKey(raw[8:], int.from_bytes(raw[:8], "big"))
