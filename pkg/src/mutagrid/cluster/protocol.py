"""Length-prefixed JSON wire protocol between master and workers.

Frame layout: a 4-byte big-endian body length followed by exactly that
many bytes of UTF-8 JSON: ``{"type": <TYPE>, "payload": {...}}``.
Truncated frames, oversized frames and unknown types are protocol errors.
"""

import json
import socket
import struct

HELLO = "HELLO"
BROADCAST_ARTIFACT = "BROADCAST_ARTIFACT"
ASSIGN_SUBTASK = "ASSIGN_SUBTASK"
PARTIAL_RESULT = "PARTIAL_RESULT"
HEARTBEAT = "HEARTBEAT"
SHUTDOWN = "SHUTDOWN"

MESSAGE_TYPES = (HELLO, BROADCAST_ARTIFACT, ASSIGN_SUBTASK, PARTIAL_RESULT,
                 HEARTBEAT, SHUTDOWN)

MAX_FRAME = 64 * 1024 * 1024

_LENGTH = struct.Struct(">I")


class ProtocolError(Exception):
    pass


def encode_message(msg_type: str, payload: dict) -> bytes:
    if msg_type not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {msg_type!r}")
    body = json.dumps({"type": msg_type, "payload": payload},
                      separators=(",", ":"), sort_keys=True).encode("utf-8")
    if len(body) > MAX_FRAME:
        raise ProtocolError(f"frame too large ({len(body)} bytes)")
    return _LENGTH.pack(len(body)) + body


def decode_message(frame: bytes) -> tuple:
    """Decode one complete frame (prefix included); returns (type, payload)."""
    if len(frame) < _LENGTH.size:
        raise ProtocolError("truncated frame: missing length prefix")
    (length,) = _LENGTH.unpack(frame[:_LENGTH.size])
    body = frame[_LENGTH.size:]
    if len(body) != length:
        raise ProtocolError(
            f"truncated frame: declared {length} bytes, got {len(body)}")
    return _decode_body(body)

def _decode_body(body: bytes) -> tuple:
    try:
        data = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"malformed frame body: {exc}") from None
    if not isinstance(data, dict) or "type" not in data:
        raise ProtocolError("frame body must be an object with a 'type'")
    msg_type = data["type"]
    if msg_type not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {msg_type!r}")
    return msg_type, data.get("payload", {})


def _recv_exact(sock: socket.socket, n: int) -> bytes | None:
    """Read exactly n bytes; None on clean EOF at a frame boundary."""
    chunks = []
    remaining = n
    while remaining:
        chunk = sock.recv(remaining)
        if not chunk:
            if remaining == n:
                return None
            raise ProtocolError("connection closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def recv_message(sock: socket.socket) -> tuple | None:
    """Read one message; None on clean EOF before a frame starts."""
    prefix = _recv_exact(sock, _LENGTH.size)
    if prefix is None:
        return None
    (length,) = _LENGTH.unpack(prefix)
    if length > MAX_FRAME:
        raise ProtocolError(f"frame too large ({length} bytes)")
    body = _recv_exact(sock, length)
    if body is None:
        raise ProtocolError("connection closed mid-frame")
    return _decode_body(body)


def send_message(sock: socket.socket, msg_type: str, payload: dict,
                 lock=None) -> None:
    frame = encode_message(msg_type, payload)
    if lock is not None:
        with lock:
            sock.sendall(frame)
    else:
        sock.sendall(frame)
