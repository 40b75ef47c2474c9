#!/usr/bin/env python3
"""Regenerates checksum_vectors.json and contract_golden.json.

Both files are computed here with plain Python arithmetic, independently of
the C++ library, and checked in so the tests compare against fixed values.
"""
import json
import random
import struct
from pathlib import Path

HERE = Path(__file__).resolve().parent


def csum(data: bytes) -> int:
    if len(data) % 2:
        data += b"\x00"
    total = 0
    for i in range(0, len(data), 2):
        total += (data[i] << 8) | data[i + 1]
    while total >> 16:
        total = (total & 0xFFFF) + (total >> 16)
    return (~total) & 0xFFFF


def ipv4(src, dst, proto, transport: bytes, ident=0x1234, ttl=64) -> bytes:
    total = 20 + len(transport)
    hdr = struct.pack("!BBHHHBBHII", 0x45, 0, total, ident, 0x4000, ttl, proto, 0, src, dst)
    c = csum(hdr)
    return hdr[:10] + struct.pack("!H", c) + hdr[12:] + transport


def pseudo(src, dst, proto, length) -> bytes:
    return struct.pack("!IIBBH", src, dst, 0, proto, length)


def tcp(src, dst, sport, dport, seq, ack, window, urg, payload: bytes, flags=0x18, options=b"") -> bytes:
    off = (20 + len(options)) // 4
    hdr = struct.pack("!HHIIBBHHH", sport, dport, seq, ack, off << 4, flags, window, 0, urg) + options
    seg = hdr + payload
    c = csum(pseudo(src, dst, 6, len(seg)) + seg)
    seg = seg[:16] + struct.pack("!H", c) + seg[18:]
    return ipv4(src, dst, 6, seg), c


def udp(src, dst, sport, dport, payload: bytes):
    length = 8 + len(payload)
    seg = struct.pack("!HHHH", sport, dport, length, 0) + payload
    c = csum(pseudo(src, dst, 17, length) + seg)
    if c == 0:
        c = 0xFFFF
    seg = seg[:6] + struct.pack("!H", c) + seg[8:]
    return ipv4(src, dst, 17, seg), c


def checksum_vectors():
    rng = random.Random(20240611)
    out = []
    for i in range(12):
        src, dst = rng.getrandbits(32), rng.getrandbits(32)
        payload = bytes(rng.getrandbits(8) for _ in range(rng.randrange(0, 90)))
        if i % 3 == 2:
            pkt, tc = udp(src, dst, rng.getrandbits(16), rng.getrandbits(16), payload)
        else:
            opts = bytes(rng.getrandbits(8) for _ in range(4 * (i % 2)))
            pkt, tc = tcp(src, dst, rng.getrandbits(16), rng.getrandbits(16), rng.getrandbits(32),
                          rng.getrandbits(32), rng.getrandbits(16), rng.getrandbits(16), payload, options=opts)
        out.append({"packet_hex": pkt.hex(), "ip_checksum": struct.unpack("!H", pkt[10:12])[0],
                    "transport_checksum": tc})
    # Zero-payload UDP with zero addresses and ports.
    pkt, tc = udp(0, 0, 0, 0, b"")
    out.append({"packet_hex": pkt.hex(), "ip_checksum": struct.unpack("!H", pkt[10:12])[0],
                "transport_checksum": tc})
    raw = [{"data_hex": bytes(rng.getrandbits(8) for _ in range(n)).hex()} for n in (0, 1, 2, 3, 7, 20, 33, 64, 1499)]
    for r in raw:
        r["checksum"] = csum(bytes.fromhex(r["data_hex"]))
    return {"packets": out, "raw": raw}


def reference_predict(data: bytes, want_dist: bool, want_emb: bool):
    counts = [1.0, 1.0, 1.0, 1.0]
    for b in data:
        counts[b % 4] += 1.0
    total = float(len(data)) + 4.0
    dist = [c / total for c in counts]
    label = max(range(4), key=lambda k: (dist[k], -k))
    out = {"label": label}
    if want_dist:
        out["distribution"] = dist
    if want_emb:
        out["embedding"] = [float(len(data)), float(data[0]), float(data[-1]), float(sum(data) % 256)]
    return out


def contract():
    rng = random.Random(7)
    pairs = []

    def rand_bytes(n):
        return bytes(rng.getrandbits(8) for _ in range(n))

    def ok_single(name, data, wd, we):
        pairs.append({"name": name, "path": "/v1/predict",
                      "request": {"bytes_hex": data.hex(), "want_distribution": wd, "want_embedding": we},
                      "status": 200, "response": reference_predict(data, wd, we)})

    ok_single("label_only", rand_bytes(16), False, False)
    ok_single("distribution", rand_bytes(40), True, False)
    ok_single("embedding", rand_bytes(9), False, True)
    ok_single("full", rand_bytes(64), True, True)
    ok_single("single_byte", bytes([0x41]), True, True)
    ok_single("tie_breaks_low", bytes([0, 1, 2, 3]), True, False)
    ok_single("all_class_three", bytes([3, 7, 11, 255]), True, True)
    ok_single("long_input", rand_bytes(1500), True, True)

    # Upper-case hex is accepted.
    data = rand_bytes(12)
    pairs.append({"name": "uppercase_hex", "path": "/v1/predict",
                  "request": {"bytes_hex": data.hex().upper(), "want_distribution": True, "want_embedding": False},
                  "status": 200, "response": reference_predict(data, True, False)})
    # Omitted want flags default to false.
    data = rand_bytes(5)
    pairs.append({"name": "defaults", "path": "/v1/predict", "request": {"bytes_hex": data.hex()},
                  "status": 200, "response": reference_predict(data, False, False)})

    def ok_batch(name, items, wd, we):
        pairs.append({"name": name, "path": "/v1/predict_batch",
                      "request": {"bytes_hex": [d.hex() for d in items], "want_distribution": wd, "want_embedding": we},
                      "status": 200, "response": {"predictions": [reference_predict(d, wd, we) for d in items]}})

    ok_batch("batch_three", [rand_bytes(n) for n in (3, 17, 32)], True, True)
    ok_batch("batch_labels", [rand_bytes(n) for n in (1, 2, 100, 8)], False, False)
    ok_batch("batch_empty", [], True, False)

    def err(name, path, request, status, caps=None):
        p = {"name": name, "path": path, "request": request, "status": status, "response": {"error": True}}
        if caps is not None:
            p["oracle_caps"] = caps
        pairs.append(p)

    err("malformed_json", "/v1/predict", "{not json", 400)
    err("missing_bytes", "/v1/predict", {"want_distribution": True}, 400)
    err("odd_hex", "/v1/predict", {"bytes_hex": "abc"}, 400)
    err("empty_bytes", "/v1/predict", {"bytes_hex": ""}, 400)
    err("batch_not_array", "/v1/predict_batch", {"bytes_hex": "00ff"}, 400)
    err("unsupported_distribution", "/v1/predict",
        {"bytes_hex": "0102", "want_distribution": True, "want_embedding": False}, 501,
        {"has_labels": True, "has_distribution": False, "has_embedding": False})
    err("unsupported_embedding", "/v1/predict_batch",
        {"bytes_hex": ["0102"], "want_distribution": False, "want_embedding": True}, 501,
        {"has_labels": True, "has_distribution": True, "has_embedding": False})
    assert len(pairs) == 20, len(pairs)
    return pairs


def main():
    (HERE / "checksum_vectors.json").write_text(json.dumps(checksum_vectors(), indent=1) + "\n")
    (HERE / "contract_golden.json").write_text(json.dumps({"pairs": contract()}, indent=1) + "\n")


if __name__ == "__main__":
    main()
