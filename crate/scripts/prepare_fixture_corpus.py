"""Build the bundled end-to-end fixture corpus.

Reads the small English Wikipedia extract and the Lee news corpus shipped in
gensim's test data, tokenizes with gensim's Wikipedia tokenizer, and writes one
document per line (lowercase, space separated tokens). Also copies the
WordSim-353 and Google analogy files.

    pip install gensim
    python3 scripts/prepare_fixture_corpus.py crates/core/tests/data
"""
import gzip
import os
import shutil
import sys

from gensim.corpora.wikicorpus import WikiCorpus
from gensim.test.utils import datapath
from gensim.utils import simple_preprocess


def main(out_dir):
    os.makedirs(out_dir, exist_ok=True)
    wiki = WikiCorpus(
        datapath("enwiki-latest-pages-articles1.xml-p000000010p000030302-shortened.bz2"),
        dictionary={},
        article_min_tokens=10,
    )
    lines = 0
    with gzip.open(os.path.join(out_dir, "wiki_small.txt.gz"), "wt", encoding="utf-8") as out:
        for tokens in wiki.get_texts():
            out.write(" ".join(tokens) + "\n")
            lines += 1
        with open(datapath("lee_background.cor"), encoding="utf-8") as lee:
            for doc in lee:
                tokens = simple_preprocess(doc)
                if tokens:
                    out.write(" ".join(tokens) + "\n")
                    lines += 1
    print("documents:", lines)

    with open(datapath("wordsim353.tsv"), encoding="utf-8") as src, open(
        os.path.join(out_dir, "wordsim353.tsv"), "w", encoding="utf-8"
    ) as dst:
        for line in src:
            if not line.startswith("#"):
                dst.write(line)
    shutil.copy(datapath("questions-words.txt"), os.path.join(out_dir, "questions-words.txt"))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")
