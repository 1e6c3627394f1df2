#!/usr/bin/env python3
"""Regenerates fixtures/corpus: six small datasets, their instruction pools
and a mock predictions file covering every record id."""

import csv
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures" / "corpus"
SUFFIX = "Return only the label without any explanation, justification or additional text."

WORDS = {
    "arabic": {
        "positive": ["رائع", "جميل", "ممتاز", "سعيد", "مفيد", "أحب"],
        "negative": ["سيء", "حزين", "مزعج", "فاشل", "أكره", "ضعيف"],
        "neutral": ["اليوم", "الخبر", "المدينة", "الاجتماع", "الطقس", "التقرير"],
        "claim": ["ارتفع", "بنسبة", "مليون", "أعلنت", "الوزارة", "أكد"],
        "filler": ["في", "من", "على", "هذا", "مع", "عن", "الناس", "الحكومة"],
    },
    "english": {
        "positive": ["great", "lovely", "excellent", "happy", "helpful", "love"],
        "negative": ["awful", "sad", "annoying", "broken", "hate", "weak"],
        "neutral": ["today", "report", "city", "meeting", "weather", "schedule"],
        "claim": ["rose", "percent", "million", "announced", "ministry", "confirmed"],
        "filler": ["the", "of", "on", "this", "with", "about", "people", "government"],
    },
    "hindi": {
        "positive": ["शानदार", "सुंदर", "बढ़िया", "खुश", "उपयोगी", "पसंद"],
        "negative": ["खराब", "दुखी", "परेशान", "असफल", "नफरत", "कमजोर"],
        "neutral": ["आज", "खबर", "शहर", "बैठक", "मौसम", "रिपोर्ट"],
        "claim": ["बढ़ा", "प्रतिशत", "लाख", "घोषणा", "मंत्रालय", "पुष्टि"],
        "filler": ["में", "से", "पर", "यह", "के", "साथ", "लोग", "सरकार"],
    },
}

# Code-switched spellings: first letter in Arabic script, rest Latin.
CODE_SWITCHED = {"yes": "يes", "no": "نo", "positive": "پositive", "negative": "نegative", "neutral": "نeutral"}

DATASETS = [
    {
        "id": "ar_claim", "name": "ArClaimFixture", "language": "arabic", "task": "Claim",
        "task_definition": "Decide whether the tweet contains a verifiable factual claim.",
        "label_space": ["yes", "no"], "metric": "accuracy", "sota": 0.703,
        "presplit": True, "layout": {"train": 70, "dev": 10, "test": 20}, "format": "csv",
        "label_map": {"yes": ["Y", "claim"], "no": ["N", "not claim"]},
    },
    {
        "id": "ar_sentiment", "name": "ArSentimentFixture", "language": "arabic", "task": "Sentiment",
        "task_definition": "Classify the sentiment expressed in the review.",
        "label_space": ["positive", "negative", "neutral"], "metric": "macro_f1", "sota": None,
        "presplit": False, "layout": {"all": 100}, "format": "tsv",
        "label_map": {"positive": ["pos"], "negative": ["neg"]},
    },
    {
        "id": "en_claim", "name": "EnClaimFixture", "language": "english", "task": "Claim",
        "task_definition": "Decide whether the tweet contains a verifiable factual claim.",
        "label_space": ["yes", "no"], "metric": "f1_positive:yes", "sota": 0.62,
        "presplit": False, "layout": {"all": 100}, "format": "jsonl",
        "label_map": {"yes": ["true"], "no": ["false"]},
    },
    {
        "id": "en_sentiment", "name": "EnSentimentFixture", "language": "english", "task": "Sentiment",
        "task_definition": "Classify the sentiment expressed in the post.",
        "label_space": ["positive", "negative", "neutral"], "metric": "macro_f1", "sota": 0.71,
        "presplit": True, "layout": {"train": 80, "test": 20}, "format": "csv",
        "label_map": {"positive": ["pos", "Positive"], "negative": ["neg"]},
    },
    {
        "id": "hi_claim", "name": "HiClaimFixture", "language": "hindi", "task": "Claim",
        "task_definition": "Decide whether the post contains a verifiable factual claim.",
        "label_space": ["yes", "no"], "metric": "accuracy", "sota": 0.8,
        "presplit": True, "layout": {"train": 70, "dev": 10, "test": 20}, "format": "jsonl",
        "label_map": {},
    },
    {
        "id": "hi_sentiment", "name": "HiSentimentFixture", "language": "hindi", "task": "Sentiment",
        "task_definition": "Classify the sentiment expressed in the post.",
        "label_space": ["positive", "negative", "neutral"], "metric": "weighted_f1", "sota": 0.65,
        "presplit": False, "layout": {"all": 100}, "format": "csv",
        "label_map": {"neutral": ["neu"]},
    },
]

INSTRUCTION_STEMS = [
    "Classify the following {lang} text for {task}.",
    "Read the {lang} post below and assign the correct {task} label.",
    "Determine the {task} label of this {lang} text.",
    "Given the {lang} text, identify its {task} category.",
    "Analyze the following {lang} content and label it for {task}.",
    "Which {task} label best fits this {lang} text?",
    "Assign one {task} label to the {lang} passage below.",
    "Label the {lang} text according to {task}.",
    "Decide the {task} class of the following {lang} message.",
    "Categorize this {lang} text by {task}.",
    "Inspect the {lang} post and output its {task} label.",
    "Predict the {task} label for the {lang} text that follows.",
    "Examine the {lang} snippet and select the {task} label.",
    "Evaluate the following {lang} text and report its {task} label.",
    "Tag the {lang} text below with its {task} label.",
    "Identify the {task} of the following {lang} statement.",
    "What is the {task} label of this {lang} text?",
    "Provide the {task} label for the {lang} input.",
    "Judge the {task} of the {lang} text below.",
    "Select the appropriate {task} label for this {lang} post.",
]


def sentence(rng, lang, label, task):
    w = WORDS[lang]
    if task == "Sentiment":
        core = rng.sample(w[label], 2)
    else:
        core = rng.sample(w["claim"], 3) if label == "yes" else rng.sample(w["neutral"], 2)
    words = core + rng.sample(w["filler"], rng.randint(2, 4))
    rng.shuffle(words)
    return " ".join(words) + " " + str(rng.randint(1, 999))


def surface(rng, label, variants):
    options = [label] + variants.get(label, [])
    return rng.choice(options) if rng.random() < 0.3 else label


def build_rows(rng, ds, count):
    rows = []
    for _ in range(count):
        label = rng.choice(ds["label_space"])
        rows.append([sentence(rng, ds["language"], label, ds["task"]), surface(rng, label, ds["label_map"]), label])
    # Degenerate rows: a duplicate, a short text and an empty text.
    if count >= 20:
        rows[5] = list(rows[3])
        rows[9] = ["!!", rows[9][1], rows[9][2]]
        rows[12] = ["", rows[12][1], rows[12][2]]
    return rows


def write_source(path, fmt, rows):
    if fmt == "jsonl":
        with path.open("w", encoding="utf-8") as f:
            for text, lab, _ in rows:
                f.write(json.dumps({"text": text, "label": lab}, ensure_ascii=False) + "\n")
        return
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t" if fmt == "tsv" else ",", lineterminator="\n")
        writer.writerow(["text", "label"])
        for text, lab, _ in rows:
            writer.writerow([text, lab])


def prediction_for(rng, gold):
    roll = rng.random()
    if roll < 0.06:
        return "I cannot provide a label for this text."
    if roll < 0.14:
        return CODE_SWITCHED[gold]
    if roll < 0.80:
        return rng.choice(["{}", "Label: {}", "The answer is {}.", "{}", "{}"]).format(
            gold.capitalize() if rng.random() < 0.3 else gold)
    return "WRONG"


def main():
    rng = random.Random(20240917)
    data_dir = ROOT / "data"
    pool_dir = ROOT / "pools"
    data_dir.mkdir(parents=True, exist_ok=True)
    pool_dir.mkdir(parents=True, exist_ok=True)

    manifest = {"version": "1", "seed": 42, "datasets": []}
    predictions = []
    for ds in DATASETS:
        sources = {}
        ordinal = 0
        for split in ("train", "dev", "test", "all"):
            if split not in ds["layout"]:
                continue
            rows = build_rows(rng, ds, ds["layout"][split])
            name = f"{ds['id']}_{split}.{ds['format']}"
            write_source(data_dir / name, ds["format"], rows)
            sources[split] = {"path": f"data/{name}", "format": ds["format"]}
            for _, _, gold in rows:
                text = prediction_for(rng, gold)
                if text == "WRONG":
                    text = rng.choice([l for l in ds["label_space"] if l != gold])
                predictions.append({"record_id": f"{ds['id']}:{ordinal}", "prediction": text})
                ordinal += 1
        manifest["datasets"].append({
            "id": ds["id"], "name": ds["name"], "language": ds["language"], "task": ds["task"],
            "task_definition": ds["task_definition"], "task_kind": "single_label",
            "label_space": ds["label_space"], "metric": ds["metric"], "sota": ds["sota"],
            "presplit": ds["presplit"], "label_map": ds["label_map"], "sources": sources,
        })

        lang = ds["language"].capitalize()
        pool = {
            "format": "instructkit-pool", "version": 1, "dataset_id": ds["id"],
            "instruct_language": "english", "task_kind": "single_label",
            "system_role": "You are a social media expert providing accurate analysis and insights.",
            "short": False,
            "instructions": [
                {"text": stem.format(lang=lang, task=ds["task"].lower()) + " " + SUFFIX,
                 "backend": "generator_a" if i < 10 else "generator_b"}
                for i, stem in enumerate(INSTRUCTION_STEMS)
            ],
        }
        with (pool_dir / f"{ds['id']}.english.pool.json").open("w", encoding="utf-8") as f:
            json.dump(pool, f, ensure_ascii=False, indent=2)
            f.write("\n")

    with (ROOT / "manifest.json").open("w", encoding="utf-8") as f:
        json.dump(manifest, f, ensure_ascii=False, indent=2)
        f.write("\n")
    with (ROOT / "predictions.jsonl").open("w", encoding="utf-8") as f:
        f.write(json.dumps({"format": "instructkit-predictions", "version": 1, "count": len(predictions)}) + "\n")
        for p in predictions:
            f.write(json.dumps(p, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
