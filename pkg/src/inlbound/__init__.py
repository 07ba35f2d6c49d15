"""Intrinsic non-locality bounds for device-independent conference key agreement."""
