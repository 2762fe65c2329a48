import json
from dataclasses import asdict, is_dataclass
from datetime import datetime

import numpy as np


class JSONEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, datetime):
            return obj.isoformat()
        if is_dataclass(obj):
            return asdict(obj)
        return super().default(obj)


def serialize_doc(doc):
    """Convert a report document into plain JSON-safe python values"""
    if doc is None:
        return None

    if isinstance(doc, (list, tuple)):
        return [serialize_doc(item) for item in doc]

    if isinstance(doc, np.ndarray):
        return serialize_doc(doc.tolist())

    if isinstance(doc, np.integer):
        return int(doc)

    if isinstance(doc, np.floating):
        return float(doc)

    if not isinstance(doc, dict):
        return doc

    result = {}
    for key, value in doc.items():
        if isinstance(value, datetime):
            result[str(key)] = value.isoformat()
        else:
            result[str(key)] = serialize_doc(value)

    return result


def dumps(doc) -> str:
    """Stable JSON text: identical documents give identical bytes"""
    return json.dumps(serialize_doc(doc), cls=JSONEncoder, sort_keys=True, indent=2) + "\n"
