#!/usr/bin/env python3
"""Example external reranker: shortest document first.

The pipeline invokes external rerankers as

    command <requests.jsonl> <docstore_path> <output.run>

where requests.jsonl holds one JSON object per topic with fields topic_id,
query (raw text) and doc_ids (first-stage candidates in rank order). The
reranker may read any candidate document from the doc store and must write a
standard 6-column run file covering every topic, using only candidate ids.
Exit code 0 means success; anything on stderr is attached to failures.
"""

import json
import os
import sys


def load_store(docstore):
    offsets = {}
    with open(os.path.join(docstore, "offsets.idx"), encoding="utf-8") as f:
        for line in f:
            doc_id, offset, length = line.rstrip("\n").split("\t")
            offsets[doc_id] = (int(offset), int(length))
    records = open(os.path.join(docstore, "records.bin"), "rb")

    def fetch(doc_id):
        offset, length = offsets[doc_id]
        records.seek(offset + 4)  # skip the u32 length prefix
        return json.loads(records.read(length).decode("utf-8"))

    return fetch


def main():
    requests_path, docstore_path, output_path = sys.argv[1:4]
    fetch = load_store(docstore_path)
    with open(requests_path, encoding="utf-8") as requests, \
         open(output_path, "w", encoding="utf-8") as out:
        for line in requests:
            request = json.loads(line)
            scored = [(-float(len(fetch(doc_id)["text"].encode("utf-8"))), doc_id)
                      for doc_id in request["doc_ids"]]
            scored.sort(key=lambda pair: (-pair[0], pair[1]))
            for rank, (score, doc_id) in enumerate(scored, start=1):
                out.write("%s Q0 %s %d %.6f length\n"
                          % (request["topic_id"], doc_id, rank, score))


if __name__ == "__main__":
    main()
