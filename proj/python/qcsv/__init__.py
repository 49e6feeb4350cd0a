# Copyright (c) 2026 The qcsv Authors
# SPDX-License-Identifier: Apache-2.0
"""Python access to a qcsv data directory.

``Repository`` talks to the same /api/v1 handlers the HTTP server uses, but
in-process. Responses are the decoded JSON bodies; failures raise QcsvError.
"""

import json
from typing import Any, Dict, Optional, Union

from ._core import API_BASE, CoreError, Service, canonical_calibration, gate_group, object_id

__all__ = [
    "API_BASE",
    "CoreError",
    "QcsvError",
    "Repository",
    "Service",
    "canonical_calibration",
    "gate_group",
    "object_id",
]


class QcsvError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: Any = None):
        super().__init__(f"{code}: {message}")
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


def _params(**kw) -> Dict[str, str]:
    return {k: str(v) for k, v in kw.items() if v is not None}


class Repository:
    def __init__(self, data_dir, create: bool = False, author: Optional[Dict[str, str]] = None):
        self._svc = Service(str(data_dir), create)
        self.author = author or {"name": "anonymous", "email": ""}

    def call(self, method: str, path: str, query=None, body=None) -> Any:
        headers = {"X-Author-Name": self.author.get("name", ""), "X-Author-Email": self.author.get("email", "")}
        text = "" if body is None else json.dumps(body)
        status, out = self._svc.request(method, API_BASE + path, query or {}, text, headers)
        doc = json.loads(out)
        if status >= 400:
            raise QcsvError(status, doc.get("code", ""), doc.get("message", ""), doc.get("detail"))
        return doc

    # branches
    def branches(self):
        return self.call("GET", "/branches")

    def create_branch(self, name: str, description: str = "", source: Optional[str] = None):
        body = {"name": name, "description": description}
        if source:
            body["from"] = source
        return self.call("POST", "/branches", body=body)

    def rename_branch(self, name: str, new_name: str):
        return self.call("POST", f"/branches/{name}/rename", body={"new_name": new_name})

    def copy_branch(self, name: str, new_name: str):
        return self.call("POST", f"/branches/{name}/copy", body={"new_name": new_name})

    def delete_branch(self, name: str, confirm: str):
        return self.call("DELETE", f"/branches/{name}", body={"confirm": confirm})

    # commits
    def commit(self, branch: str, chip: str, calibration: Union[dict, str], message: str,
               timestamp: Optional[str] = None) -> str:
        doc = json.loads(calibration) if isinstance(calibration, str) else calibration
        body = {"calibration": doc, "message": message}
        if timestamp:
            body["timestamp"] = timestamp
        return self.call("POST", f"/branches/{branch}/chips/{chip}/commits", body=body)["id"]

    def log(self, branch: str):
        return self.call("GET", f"/branches/{branch}/commits")

    def get_commit(self, commit: str):
        return self.call("GET", f"/commits/{commit}")

    def diff(self, from_commit: str, to_commit: str, branch: Optional[str] = None):
        return self.call("GET", "/diff", _params(branch=branch, **{"from": from_commit, "to": to_commit}))

    def merge(self, from_branch: str, to_branch: str, strategy: str = "manual", resolutions=None,
              message: Optional[str] = None):
        body = {"from_branch": from_branch, "to_branch": to_branch, "strategy": strategy}
        if resolutions:
            body["resolutions"] = resolutions
        if message:
            body["message"] = message
        return self.call("POST", "/merge", body=body)

    def history(self, limit: Optional[int] = None, branch: Optional[str] = None):
        return self.call("GET", "/history", _params(limit=limit, branch=branch))

    # characterization
    def ingest(self, filename: str, document: Union[dict, str]):
        doc = json.loads(document) if isinstance(document, str) else document
        return self.call("POST", "/characterization", body={"filename": filename, "document": doc})

    def characterization_chips(self):
        return self.call("GET", "/characterization/chips")

    def series_by_qubit(self, chip: str, qubit: str):
        return self.call("GET", f"/characterization/{chip}/qubits/{qubit}")["series"]

    def series_by_property(self, chip: str, prop: str):
        return self.call("GET", f"/characterization/{chip}/properties/{prop}")["series"]

    # charts
    def chart_by_commit(self, branch: str, chip: str, commit: str, prop: str, kind: str = "gates", pulse: int = 0):
        return self.call("GET", "/charts/calibration/by-commit",
                         _params(branch=branch, chip=chip, commit=commit, property=prop, kind=kind, pulse=pulse))

    def chart_by_property(self, branch: str, chip: str, entity: str, name: str, prop: str, pulse: int = 0):
        return self.call("GET", "/charts/calibration/by-property",
                         _params(branch=branch, chip=chip, entity=entity, name=name, property=prop, pulse=pulse))

    def chart_characterization(self, chip: str, mode: str, key: str):
        return self.call("GET", "/charts/characterization", _params(chip=chip, mode=mode, key=key))

    # HTTP
    def serve(self, port: int = 0, bind: str = "127.0.0.1") -> int:
        return self._svc.start(port, bind)

    def stop(self) -> None:
        self._svc.stop()
