#!/usr/bin/env python3
"""Regenerates the audit fixture in this directory.

Writes corpus/abstracts.jsonl, traces.jsonl and scores.csv. The abstracts and
the task instruction are placeholders written for this fixture; the response
set is constructed so that its aggregate counts match a reference audit:

  * 46 responses from 44 workers (two workers answered twice)
  * 21 logits above 0 and 15 above 4 (one logit sits exactly on each cut)
  * at threshold 4, paste x decision = [[15, 0], [26, 5]]
  * 13 pasted summaries overlap their abstract by < 10%, 10 of them synthetic

Run from anywhere: python3 generate.py
"""

import difflib
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
rng = random.Random(20230601)

INSTRUCTION = (
    "Read the abstract of a medical research article below and summarize it in your own words "
    "in a short paragraph of about 100 words. Do not copy sentences from the abstract."
)

TOPICS = {
    "vaccination": (
        ["influenza vaccine", "measles booster", "pneumococcal conjugate vaccine", "HPV vaccine",
         "rotavirus vaccine", "pertussis booster", "zoster vaccine", "hepatitis B vaccine"],
        ["seroconversion", "laboratory-confirmed infection", "hospital admission", "antibody titre",
         "febrile seizure", "injection-site reaction"]),
    "breast_cancer": (
        ["adjuvant tamoxifen", "aromatase inhibition", "digital mammography", "sentinel node biopsy",
         "neoadjuvant chemotherapy", "trastuzumab", "tomosynthesis", "partial breast irradiation"],
        ["invasive recurrence", "distant metastasis", "overall survival", "recall rate",
         "interval cancer", "lymphedema"]),
    "cardiovascular": (
        ["high-intensity statin", "polypill", "renal denervation", "dual antiplatelet therapy",
         "sodium reduction", "beta-blocker withdrawal", "colchicine", "intensive blood-pressure control"],
        ["myocardial infarction", "ischemic stroke", "cardiovascular death", "major bleeding",
         "heart-failure hospitalization", "coronary revascularization"]),
    "nutrition": (
        ["Mediterranean diet", "vitamin D supplementation", "omega-3 fatty acids", "sugar-sweetened beverage tax",
         "time-restricted eating", "folic acid fortification", "nut consumption", "low-fat dairy"],
        ["incident diabetes", "body-mass index", "all-cause mortality", "fracture",
         "gestational weight gain", "neural-tube defect"]),
}

COUNTRIES = ["Denmark", "Canada", "Brazil", "Japan", "Kenya", "Spain", "Australia", "Finland", "Chile", "India"]
DESIGNS = ["randomized, double-blind, placebo-controlled trial", "pragmatic cluster-randomized trial",
           "prospective cohort study", "multicenter, open-label, randomized trial", "nationwide registry study"]


def abstract_text(topic, exposure, outcomes, idx):
    design = rng.choice(DESIGNS)
    country = rng.choice(COUNTRIES)
    n = rng.randint(1200, 48000)
    years = rng.randint(2, 9)
    o1, o2, o3 = rng.sample(outcomes, 3)
    hr = round(rng.uniform(0.55, 0.92), 2)
    lo = round(hr - rng.uniform(0.05, 0.15), 2)
    hi = round(hr + rng.uniform(0.04, 0.12), 2)
    pct_a = round(rng.uniform(2.0, 14.0), 1)
    pct_b = round(pct_a * hr, 1)
    sentences = [
        f"BACKGROUND Whether {exposure} reduces the risk of {o1} in routine practice remains uncertain, "
        f"and previous estimates were derived from small or short studies conducted mainly in high-income settings.",
        f"METHODS We conducted a {design} at {rng.randint(12, 140)} sites in {country}.",
        f"Eligible participants were {rng.randint(18, 65)} years of age or older and had no documented "
        f"contraindication to {exposure}.",
        f"A total of {n:,} participants were assigned in a 1:1 ratio to {exposure} or to usual care "
        f"and were followed for a median of {years}.{rng.randint(0, 9)} years.",
        f"The primary outcome was {o1}; secondary outcomes included {o2}, {o3}, and safety events "
        f"adjudicated by a committee unaware of the group assignments.",
        f"RESULTS The primary outcome occurred in {pct_b}% of the participants in the {exposure} group and in "
        f"{pct_a}% of those in the control group (hazard ratio, {hr:.2f}; 95% confidence interval, {lo:.2f} to {hi:.2f}).",
        f"The effect was consistent across prespecified subgroups defined according to sex, age, and baseline "
        f"risk category (P={round(rng.uniform(0.12, 0.91), 2)} for interaction).",
        f"Rates of {o2} were {round(rng.uniform(1, 9), 1)} per 1000 person-years with {exposure} and "
        f"{round(rng.uniform(1, 9), 1)} per 1000 person-years with usual care.",
        f"Serious adverse events were reported in {round(rng.uniform(3, 20), 1)}% and "
        f"{round(rng.uniform(3, 20), 1)}% of participants, respectively, and no unexpected safety signals emerged "
        f"during {years} years of surveillance.",
        f"Adherence at {rng.randint(6, 24)} months was {rng.randint(61, 94)}% in the intervention group, and a "
        f"per-protocol analysis yielded results similar to those of the primary analysis.",
        f"Sensitivity analyses that accounted for competing risks, missing follow-up data, and site-level "
        f"clustering did not materially change the estimate for {o1}.",
        f"CONCLUSIONS Among adults in {country}, {exposure} resulted in a lower incidence of {o1} than usual care, "
        f"with no significant excess of {o3}.",
        f"(Funded by the {country} Research Council; registry number NCT0{rng.randint(1000000, 9999999)}.)",
    ]
    text = " ".join(sentences)
    filler = [
        f"Exploratory analyses suggested a dose-response relation between cumulative exposure to {exposure} "
        f"and the incidence of {o2}.",
        f"Cost-effectiveness estimates will be reported separately for the {country} health system.",
        f"Trial profile {idx}: investigators, participants, and outcome assessors were unaware of the assignments.",
    ]
    while len(text) < 1900 and filler:
        text = text.replace(" CONCLUSIONS", " " + filler.pop(0) + " CONCLUSIONS", 1)
    return text


abstracts = []
for topic, (exposures, outcomes) in TOPICS.items():
    for k in range(4):
        exposure = exposures[k]
        aid = f"abs-{topic[:4]}-{k + 1}"
        abstracts.append({
            "abstract_id": aid,
            "topic": topic,
            "text": abstract_text(topic, exposure, outcomes, len(abstracts) + 1),
            "instruction": INSTRUCTION,
            "_exposure": exposure,
            "_outcomes": outcomes,
        })

# ---- summary text builders -------------------------------------------------

LLM_OPEN = ["This study investigates", "The research evaluates", "This large trial examines",
            "The authors explore", "This investigation assesses"]
LLM_MID = [
    "Participants were randomly allocated and followed over several years to capture meaningful clinical events.",
    "The investigators carefully monitored adherence and safety throughout the follow-up period.",
    "Notably, the benefit appeared consistent across key demographic subgroups.",
    "Importantly, no unexpected safety concerns were identified during surveillance.",
    "The design allowed a robust comparison between the intervention and standard care.",
]
LLM_CLOSE = [
    "Overall, these findings highlight the potential of the intervention to improve population health outcomes.",
    "In conclusion, the study underscores the value of evidence-based prevention strategies in clinical practice.",
    "Ultimately, the results suggest that wider adoption could meaningfully reduce the burden of disease.",
    "These insights emphasize the importance of integrating such approaches into routine care.",
]
HUMAN_BITS = [
    "so the researchers wanted to know if", "basically they compared", "the main finding was that",
    "people who got it had", "they followed people for a few years and", "side effects were about the same",
    "it seems to work but not huge", "i think the takeaway is", "overall it helped a bit with",
]


def llm_text(a):
    exposure = a["_exposure"]
    outcome = rng.choice(a["_outcomes"])
    parts = [f"{rng.choice(LLM_OPEN)} whether {exposure} lowers the likelihood of {outcome} in adults.",
             *rng.sample(LLM_MID, 3), rng.choice(LLM_CLOSE)]
    return " ".join(parts)


def human_text(a, words=40):
    exposure = a["_exposure"]
    outcome = rng.choice(a["_outcomes"])
    bits = rng.sample(HUMAN_BITS, 4)
    return (f"{bits[0]} {exposure} changes {outcome}. {bits[1]} the two groups. "
            f"{bits[2]} less {outcome} with {exposure}. {bits[3]}.")


def excerpt(a, fraction):
    text = a["text"]
    length = max(1, int(len(text) * fraction))
    start = rng.randint(0, len(text) - length)
    # Start and end on word boundaries so the pasted chunk reads naturally.
    while start > 0 and text[start - 1] != " ":
        start -= 1
    chunk = text[start:start + length].strip()
    return chunk


def lcs_ratio(summary, abstract):
    m = difflib.SequenceMatcher(None, summary, abstract, autojunk=False)
    match = m.find_longest_match(0, len(summary), 0, len(abstract))
    return match.size / len(abstract)


# ---- response plan ------------------------------------------------------------

plan = []  # (kind, logit)
synthetic_logits = [4.6, 5.1, 5.8, 6.3, 6.9, 7.2, 7.7, 8.1, 8.6, 9.0, 4.3, 5.5, 6.6, 7.4, 8.9]
for i in range(10):
    plan.append(("syn_low", synthetic_logits[i]))
for i in range(5):
    plan.append(("syn_high", synthetic_logits[10 + i]))
for logit in [3.1, -2.4, -5.2]:
    plan.append(("hum_pasted_low", logit))
# 23 pasted human summaries with substantial copying: five of them in (0, 4], one exactly 4.
mid = [4.0, 3.6, 2.2, 1.4, 0.6]
low = [0.0, -0.3, -0.9, -1.5, -1.8, -2.1, -2.7, -3.0, -3.3, -3.8, -4.1, -4.4, -4.8, -5.5, -5.9, -6.2, -6.6, -7.1]
for logit in mid + low:
    plan.append(("hum_pasted_high", logit))
for logit in [-1.1, -2.9, -3.6, -4.7, -6.0]:
    plan.append(("hum_typed", logit))
assert len(plan) == 46
rng.shuffle(plan)

# Workers: w01 and w02 answer twice (w01 only synthetic, w02 only human at every threshold).
syn_idx = [i for i, (k, lg) in enumerate(plan) if lg > 4][:2]
hum_idx = [i for i, (k, lg) in enumerate(plan) if lg <= 0 and k != "hum_typed"][:2]
worker_of = {}
next_worker = 3
for i in range(46):
    if i in syn_idx:
        worker_of[i] = "w01"
    elif i in hum_idx:
        worker_of[i] = "w02"
    else:
        worker_of[i] = f"w{next_worker:02d}"
        next_worker += 1
assert len(set(worker_of.values())) == 44

# ---- traces ---------------------------------------------------------------------

FIELD = "summary"


class Session:
    def __init__(self):
        self.ts = rng.randint(500, 4000)
        self.events = []
        self.text = ""

    def tick(self, lo=40, hi=260):
        self.ts += rng.randint(lo, hi)
        return self.ts

    def type(self, s):
        for ch in s:
            key = "Space" if ch == " " else ch
            self.events.append({"ts_ms": self.tick(), "kind": "keydown", "key": key, "field_id": FIELD})
            self.events.append({"ts_ms": self.ts, "kind": "input", "inserted_text": ch, "field_id": FIELD})
        self.text += s

    def paste(self, s, keyboard=True):
        if keyboard:
            self.events.append({"ts_ms": self.tick(800, 4000), "kind": "keydown", "key": "Control", "field_id": FIELD})
            self.events.append({"ts_ms": self.tick(20, 80), "kind": "keydown", "key": "v", "field_id": FIELD})
            self.events.append({"ts_ms": self.ts, "kind": "paste", "inserted_text": s, "field_id": FIELD})
        else:
            # Context-menu paste: no paste event reached the log, only one burst insert.
            self.events.append({"ts_ms": self.tick(800, 4000), "kind": "input", "inserted_text": s,
                                "field_id": FIELD})
        self.text += s

    def copy_instruction(self):
        self.events.append({"ts_ms": self.tick(300, 1500), "kind": "copy", "field_id": "instructions"})


traces = []
scores = []
ratios = {}
menu_paste_done = False
other_field_paste_done = False
for i, (kind, logit) in enumerate(plan):
    a = abstracts[i % 16]
    rid = f"r{i + 1:03d}"
    s = Session()
    if kind in ("syn_low", "syn_high"):
        if rng.random() < 0.6:
            s.copy_instruction()
        body = llm_text(a)
        if kind == "syn_high":
            body = body + " " + excerpt(a, rng.uniform(0.22, 0.35))
        s.paste(body)
        if rng.random() < 0.5:
            s.type(" " + rng.choice(["Thanks.", "Done", "ok"]))
    elif kind == "hum_pasted_low":
        s.paste(human_text(a))
    elif kind == "hum_pasted_high":
        s.type(rng.choice(HUMAN_BITS) + " ")
        chunk = excerpt(a, rng.uniform(0.14, 0.6))
        s.paste(chunk, keyboard=menu_paste_done or rng.random() < 0.8)
        if not s.events[-1]["kind"] == "paste":
            menu_paste_done = True
        s.type(" " + rng.choice(HUMAN_BITS) + ".")
    else:  # hum_typed: retyped by hand, never pasted into the summary box
        s.type(rng.choice(HUMAN_BITS) + " ")
        s.type(excerpt(a, rng.uniform(0.13, 0.3)))
        s.type(" " + rng.choice(HUMAN_BITS) + ".")
        if not other_field_paste_done:
            s.events.append({"ts_ms": s.tick(), "kind": "paste", "inserted_text": "feedback: task was fine",
                             "field_id": "feedback"})
            other_field_paste_done = True
    final = " ".join(s.text.split())
    ratio = lcs_ratio(final, a["text"])
    ratios[rid] = ratio
    low = kind in ("syn_low", "hum_pasted_low")
    if low:
        assert ratio < 0.085, (rid, kind, ratio)
    else:
        assert ratio > 0.115, (rid, kind, ratio)
    header = {"response_id": rid, "worker_id": worker_of[i], "abstract_id": a["abstract_id"], "field_id": FIELD,
              "final_text": final}
    events = s.events
    if i == 5:
        events = events[:]
        rng.shuffle(events)  # logged out of order; the parser sorts by timestamp
    traces.append((header, events))
    scores.append((rid, logit))

assert menu_paste_done and other_field_paste_done

# ---- checks of the reference aggregates --------------------------------------

pasted = {h["response_id"]: any(e["field_id"] == FIELD and e.get("inserted_text") and
                                (e["kind"] == "paste" or (e["kind"] == "input" and len(e["inserted_text"]) >= 20))
                                for e in ev) for h, ev in traces}
logit_of = dict(scores)
assert sum(1 for lg in logit_of.values() if lg > 0) == 21
assert sum(1 for lg in logit_of.values() if lg > 4) == 15
matrix = [[0, 0], [0, 0]]
for rid, lg in logit_of.items():
    matrix[0 if lg > 4 else 1][0 if pasted[rid] else 1] += 1
assert matrix == [[15, 0], [26, 5]], matrix
low_ids = [rid for rid in logit_of if pasted[rid] and ratios[rid] < 0.10]
assert len(low_ids) == 13 and sum(1 for r in low_ids if logit_of[r] > 4) == 10
assert all(ratios[r] >= 0.10 for r in logit_of if not pasted[r])

# ---- write ------------------------------------------------------------------------------

os.makedirs(os.path.join(HERE, "corpus"), exist_ok=True)
with open(os.path.join(HERE, "corpus", "abstracts.jsonl"), "w", newline="\n") as f:
    for a in abstracts:
        f.write(json.dumps({k: v for k, v in a.items() if not k.startswith("_")}, ensure_ascii=False) + "\n")
with open(os.path.join(HERE, "traces.jsonl"), "w", newline="\n") as f:
    for header, events in traces:
        f.write(json.dumps(header, ensure_ascii=False) + "\n")
        for e in events:
            f.write(json.dumps(e, ensure_ascii=False) + "\n")
with open(os.path.join(HERE, "scores.csv"), "w", newline="\n") as f:
    f.write("response_id,logit,scorer_name\n")
    for rid, lg in scores:
        f.write(f"{rid},{lg!r},fixture-logits\n")
print("wrote", len(abstracts), "abstracts,", len(traces), "traces; low-overlap:", len(low_ids))
