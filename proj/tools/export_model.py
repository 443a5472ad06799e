# Copyright 2026 The dialect-audit Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Exports a Hugging Face BERT sequence classifier for `--model`.

Writes model.safetensors, config.json and vocab.txt into the output
directory. Needs torch and transformers; run once, offline thereafter.

    python tools/export_model.py unitary/toxic-bert models/toxic-bert
"""
import argparse
import os

from transformers import AutoModelForSequenceClassification, BertTokenizer


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("source", help="hub id or local directory")
    parser.add_argument("output", help="directory to write")
    args = parser.parse_args()

    model = AutoModelForSequenceClassification.from_pretrained(args.source)
    if model.config.model_type != "bert":
        raise SystemExit(f"unsupported model_type {model.config.model_type!r}")
    tokenizer = BertTokenizer.from_pretrained(args.source)
    if not tokenizer.do_lower_case:
        raise SystemExit("only uncased vocabularies are supported")

    os.makedirs(args.output, exist_ok=True)
    model.eval()
    model.save_pretrained(args.output, safe_serialization=True)
    vocab = sorted(tokenizer.get_vocab().items(), key=lambda kv: kv[1])
    if [i for _, i in vocab] != list(range(len(vocab))):
        raise SystemExit("vocabulary ids are not contiguous")
    with open(os.path.join(args.output, "vocab.txt"), "w", encoding="utf-8") as f:
        for token, _ in vocab:
            f.write(token + "\n")
    print(f"wrote {args.output}: {sorted(os.listdir(args.output))}")


if __name__ == "__main__":
    main()
