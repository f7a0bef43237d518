#!/usr/bin/env python3
"""Regenerate the cross-language detection test vectors.

The browser extension mirrors the scanner's normalize/classify rules in
TypeScript; both implementations must agree on these vectors. Run this
after changing phrase matching or normalization, then re-run both test
suites:

    python3 tools/generate_detection_vectors.py
    pytest tests/test_detection_vectors.py
    (cd frontend && npx vitest run)
"""

from __future__ import annotations

import json
from pathlib import Path

from ccpa_optout.detection import PhraseSet, classify_phrase, normalize_text

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "detection_vectors.json"

NORMALIZE_INPUTS = [
    "Do Not  Sell\n My Personal Information ",
    "",
    "CALIFORNIA Privacy",
    "a b  c",
    "\t mixed \r\n WHITESPACE  runs ",
    "Do Not Sell\tMy\nPersonal  Information",
    "  leading and trailing  ",
    "UPPER lower MiXeD",
]

CLASSIFY_INPUTS = [
    "Do Not Sell My Personal Information",
    "DO NOT SELL MY PERSONAL INFORMATION",
    "do not  sell\tmy personal information",
    "CCPA: Do Not Sell My Personal Information (California residents)",
    "Your California Privacy Rights",
    "california privacy notice",
    "Consumer Privacy",
    "consumer privacy policy",
    "Do Not Sell",
    "Do Not Sell My Info",
    "DO NOT SELL MY DATA",
    "About Us",
    "Privacy Policy",
    "privacy",
    "Do Not Share My Data",
    "donotsellmypersonalinformation",
    "Sell your stuff online",
    "Terms of Service",
    "",
    "Opt out",
    "personal information",
    "Do Not Sell My Personal Information",
]


def main() -> None:
    phrases = PhraseSet.default()
    vectors = {
        "phrase_set": {
            "valid": list(phrases.valid_phrases),
            "ambiguous": list(phrases.ambiguous_phrases),
        },
        "normalize": [
            {"raw": raw, "normalized": normalize_text(raw)} for raw in NORMALIZE_INPUTS
        ],
        "classify": [
            {
                "text": text,
                "verdict": classify_phrase(normalize_text(text), phrases).to_wire(),
            }
            for text in CLASSIFY_INPUTS
        ],
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(vectors, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
