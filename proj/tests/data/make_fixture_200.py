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
"""Writes fixture_200.tsv: 200 synthetic rows in the TwitterAAE column layout.

Rows 0-99 lean AAE, rows 100-199 lean SAE; three rows are deliberately
malformed so the skip accounting is exercised end to end.
"""
import os
import random

AAE = ["he be workin all day", "i ain't bothering nobody", "she at the library",
       "smh these folks mad", "i did not mean to say dat", "we finna go eat",
       "ion even care lol", "that boy stay trippin", "yall seen my phone",
       "who mad me or ol boy", "dat game was crazy", "nobody ain't got time"]
SAE = ["I had a very laid back day", "Roll Tide Roll", "I think I'm hungry",
       "I can finally receive videos on snapchat", "Just finished my run",
       "Coffee first then emails", "Can't wait for the game tonight",
       "That traffic was so stupid today", "Happy birthday to my best friend",
       "Going to the lake this weekend", "I hate Mondays", "What a day"]


def main():
    rng = random.Random(20260101)
    lines = ["tweet_id\ttext\tp_aa\tp_hispanic\tp_other\tp_white"]
    for i in range(200):
        aae = i < 100
        base = rng.choice(AAE if aae else SAE)
        extra = rng.choice(["", " lol", " damn", " smh", " for real", " idiot", ""])
        text = base + extra
        major = round(rng.uniform(0.6, 0.99), 6)
        minor = round(rng.uniform(0.0, 1.0 - major), 6)
        rest = round(1.0 - major - minor, 6)
        p_aa, p_white = (major, minor) if aae else (minor, major)
        lines.append(f"{900000 + i}\t{text}\t{p_aa:.6f}\t{rest / 2:.6f}\t{rest / 2:.6f}\t{p_white:.6f}")
    lines[10] = "900009\t   \t0.950000\t0.01\t0.01\t0.030000"
    lines[60] = "900059\tbroken posterior\tabc\t0.01\t0.01\t0.030000"
    lines[150] = "900149\tout of range\t0.100000\t0.01\t0.01\t1.500000"
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixture_200.tsv")
    with open(out, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
