#!/usr/bin/env python3
"""Builds the synthetic scenario corpus under data/corpus.

Every scenario is invented. Output is deterministic: rerunning the script
reproduces the checked-in files byte for byte.
"""

import argparse
import json
import math
import pathlib

DOMAINS = [
    "Values & Beliefs",
    "Physical & Mental Health",
    "Daily Life Circumstances",
    "Interpersonal Relations",
    "Work & Study",
    "Family & Intimacy",
]

# (name, gender, age, topic, circumstances, trigger, goal)
SEEDS = {
    "Values & Beliefs": [
        ("Aria Stone", "female", 29, "leaving a faith community",
         "She stopped attending the congregation she grew up in and her old friends no longer call.",
         "A former mentor posted a sermon that seemed aimed at her.",
         "Find a way to keep her values without the community's approval."),
        ("Tomas Reyes", "male", 41, "a whistleblowing dilemma",
         "He found billing irregularities at the clinic where he manages records.",
         "His manager asked him to sign off on a report he believes is false.",
         "Decide whether to report it without losing his livelihood."),
        ("Mei Okafor", "female", 35, "a vegan household split",
         "Her partner resumed eating meat and the kitchen became a daily argument.",
         "She found meat in the freezer she had kept separate for years.",
         "Hold to her convictions without making home a battlefield."),
        ("Daniel Kovac", "male", 52, "political estrangement from a brother",
         "He and his younger brother have not spoken since an election-night fight.",
         "His brother skipped their father's birthday dinner to avoid him.",
         "Repair enough of the bond to share family events again."),
        ("Ines Varga", "nonbinary", 24, "quitting a prestigious program on principle",
         "They walked out of a sponsored fellowship whose funder they object to.",
         "A relative called the decision naive in the family group chat.",
         "Trust their own judgement while the doubts keep coming."),
    ],
    "Physical & Mental Health": [
        ("Leo Brandt", "male", 33, "panic attacks at work",
         "He has had three panic attacks in meetings this month.",
         "He left a client presentation halfway through, shaking.",
         "Keep working while getting the attacks under control."),
        ("Sana Iqbal", "female", 46, "a new chronic illness diagnosis",
         "She was diagnosed with an autoimmune condition after a year of tests.",
         "Her specialist said the fatigue is likely permanent.",
         "Rebuild a routine that fits her new energy limits."),
        ("Grace Mensah", "female", 27, "recovery after a sports injury",
         "A torn ligament ended her semi-professional football season.",
         "The club announced her replacement on social media.",
         "Accept the slow rehab without losing her identity."),
        ("Omar Haddad", "male", 38, "insomnia and burnout",
         "He sleeps four hours a night and has started making mistakes.",
         "He dozed off while driving home and woke on the rumble strip.",
         "Get his sleep back before something worse happens."),
        ("Lena Fischer", "female", 19, "disordered eating relapse",
         "She had been stable for two years before exam season began.",
         "A roommate noticed she had skipped meals for days.",
         "Ask for help without feeling she has failed."),
    ],
    "Daily Life Circumstances": [
        ("Marco Silva", "male", 31, "eviction notice",
         "His landlord is selling the building and gave sixty days notice.",
         "A second flat application was rejected this morning.",
         "Secure housing before the deadline."),
        ("Hana Sato", "female", 26, "moving to a city alone",
         "She relocated for a job and knows nobody within three hundred kilometres.",
         "She spent her birthday alone in an unfurnished flat.",
         "Build a first small circle of people in the new city."),
        ("Peter Walsh", "male", 58, "sudden debt after a scam",
         "He lost most of his savings to an investment scam.",
         "The bank confirmed the transfer cannot be reversed.",
         "Stabilise his finances and stop the shame from isolating him."),
        ("Nadia Petrova", "female", 34, "a car accident aftermath",
         "She was rear-ended at a junction and now dreads driving.",
         "The insurer disputed her claim and she must drive to work again.",
         "Get back behind the wheel and settle the claim."),
        ("Kwame Boateng", "male", 22, "losing a part-time job",
         "The café he worked at closed without paying the last month.",
         "His rent payment bounced the same week.",
         "Find income fast and recover the unpaid wages."),
    ],
    "Interpersonal Relations": [
        ("Elif Demir", "female", 30, "a friendship betrayal",
         "Her closest friend shared a private secret with their group.",
         "She overheard others joking about it at a party.",
         "Decide whether the friendship can survive."),
        ("Jonas Berg", "male", 28, "feeling excluded by colleagues",
         "His team goes to lunch without him and he learns of plans afterwards.",
         "He saw photos of a team dinner he was not invited to.",
         "Understand what happened and find his place in the group."),
        ("Priya Nair", "female", 37, "conflict with a neighbour",
         "A neighbour has filed repeated noise complaints about her children.",
         "A formal warning from the housing association arrived.",
         "Resolve the dispute without moving."),
        ("Victor Huang", "male", 44, "a falling out with a business partner",
         "His co-founder accused him of taking credit for a deal.",
         "The partner announced the split to their clients first.",
         "Separate the business fairly and keep his reputation."),
        ("Sofia Romano", "female", 21, "online harassment",
         "An anonymous account has been posting edited photos of her.",
         "A classmate forwarded one of the posts to her directly.",
         "Make the harassment stop and feel safe at college again."),
    ],
    "Work & Study": [
        ("Lin Wei", "female", 23, "retaking the graduate entrance exam",
         "She failed the exam once and gave up a job offer to try again.",
         "Her mock exam score dropped below last year's result.",
         "Pass this year's exam and prove the gamble was worth it."),
        ("Aidan Murphy", "male", 35, "passed over for promotion",
         "A younger colleague he trained got the team lead role.",
         "His manager called the decision purely about fit.",
         "Decide whether to stay and push, or leave."),
        ("Zara Ahmed", "female", 29, "thesis supervisor conflict",
         "Her supervisor rejected the third draft of her thesis chapter.",
         "The supervisor suggested she might not be suited to research.",
         "Finish the doctorate or leave on her own terms."),
        ("Ben Carter", "male", 40, "a layoff after fifteen years",
         "He was laid off in a restructuring with one day of notice.",
         "His badge stopped working before he had cleared his desk.",
         "Find new work while supporting two children."),
        ("Yuki Tanaka", "female", 18, "a failed university application",
         "She was rejected from every programme she applied to.",
         "Her best friend received an offer from her first choice.",
         "Choose a realistic path for the coming year."),
    ],
    "Family & Intimacy": [
        ("Rosa Alvarez", "female", 39, "caring for a parent with dementia",
         "Her mother no longer recognises her on bad days.",
         "Her mother called the police thinking Rosa was an intruder.",
         "Arrange care without feeling she is abandoning her mother."),
        ("Samuel Eze", "male", 32, "a miscarriage",
         "He and his wife lost a pregnancy at eleven weeks.",
         "Relatives kept asking about the baby at a family wedding.",
         "Grieve while supporting his wife."),
        ("Clara Novak", "female", 45, "an affair discovered",
         "She found messages proving her husband had an affair.",
         "Her husband asked her to keep it from their teenage son.",
         "Decide about the marriage without harming her son."),
        ("Ethan Brooks", "male", 26, "coming out to conservative parents",
         "He told his parents he is gay and they stopped replying.",
         "His mother returned the gift he had sent for her birthday.",
         "Keep a relationship with his parents on honest terms."),
        ("Amara Diallo", "female", 50, "an empty nest and a distant marriage",
         "Her youngest left for university and the house is silent.",
         "Her husband booked a solo trip without asking her.",
         "Work out what she wants from the next part of her life."),
    ],
}

AXES = ["C", "A", "P"]
AXIS_NAMES = {"C": "cognitive", "A": "affective", "P": "motivational"}
# Indicator weight multipliers per axis, base unit -2 per level.
WEIGHTS = {"C": (1.0, 1.0, 1.5), "A": (1.0, 2.0, 1.5), "P": (1.0, 2.0, 1.5)}
MU, SIGMA = 32.32, 4.52
BANDS = ["Easy", "Medium", "Hard", "Extreme"]

NOTES = {
    "C": "Wants the situation laid out clearly and their reasoning taken seriously.",
    "A": "Wants the feelings named and sat with before anything else.",
    "P": "Wants concrete help choosing and taking a next step.",
}


def band_of(r0):
    if r0 > MU + SIGMA:
        return "Extreme"
    if r0 > MU:
        return "Hard"
    if r0 >= MU - SIGMA:
        return "Medium"
    return "Easy"


def p0_of(levels):
    return [sum(-2.0 * w * l for w, l in zip(WEIGHTS[a], levels[a])) for a in AXES]


def pick_levels(primary, target, offset):
    """First level pattern (scanning from `offset`) whose r0 lands in `target`."""
    candidates = []
    for hi in (3, 2, 1):
        for lo1 in range(4):
            for lo2 in range(4):
                for lo3 in range(4):
                    levels = {}
                    for a in AXES:
                        if a == primary:
                            levels[a] = (hi, hi, hi)
                        else:
                            levels[a] = (lo1, lo2, lo3) if a < primary else (lo3, lo2, lo1)
                    candidates.append(levels)
    n = len(candidates)
    for k in range(n):
        levels = candidates[(offset * 37 + k) % n]
        r0 = math.sqrt(sum(x * x for x in p0_of(levels)))
        if (band_of(r0) == target and all(sum(v) > 0 for v in levels.values())
                and levels[primary][0] >= max(max(v) for v in levels.values())):
            return levels, r0
    raise SystemExit(f"no level pattern for {primary} {target}")


def iedr_json(levels, seed):
    name, _, _, topic, circumstances, trigger, _ = seed
    out = []
    for a in AXES:
        for i, level in enumerate(levels[a], start=1):
            out.append({
                "id": f"{a}.{i}",
                "level": level,
                "evidence": (trigger if i == 1 else circumstances) if level else "0",
                "reasoning": f"{name}: {topic}, level {level}" if level else "",
            })
    return {"indicators": out}


def build(index, domain, seed, primary, mode, defensive, band):
    name, gender, age, topic, circumstances, trigger, goal = seed
    first = name.split()[0]
    pron = {"female": ("she", "her"), "male": ("he", "his")}.get(gender, ("they", "their"))
    others = [a for a in AXES if a != primary]
    priority = {AXIS_NAMES[primary]: "High",
                AXIS_NAMES[others[0]]: "Medium" if index % 2 else "Low",
                AXIS_NAMES[others[1]]: "Low" if index % 2 else "Medium"}
    threshold = "High" if defensive else ("Medium" if index % 3 else "Low")
    levels, r0 = pick_levels(primary, band, index)
    guard = ("Pushes back on quick advice and tests whether the listener is sincere."
             if defensive else "Opens up once they feel heard.")
    persona = {
        "role_info": {"name": name, "gender": gender, "age": age},
        "role_traits": {
            "social_persona": f"{first} comes across as capable and composed to people who know {pron[1]} loosely.",
            "inner_core": f"Underneath, {first} doubts whether {pron[0]} can handle {topic} alone.",
        },
        "empathy_threshold": threshold,
        "threshold_description": guard,
        "chat_topic": topic,
        "empathy_needs": {
            "vent_content": circumstances + " " + trigger,
            "hoped_points": NOTES[primary],
            "threshold_constraints": guard,
        },
        "empathy_priority": priority,
        "priority_notes": {AXIS_NAMES[a]: NOTES[a] for a in AXES},
        "past_experiences": {
            "childhood": f"{first} grew up as the one who kept things calm at home.",
            "adolescence": f"As a teenager {first} learned to hide worry behind good results.",
            "young_adulthood": f"In {pron[1]} twenties {first} built a life around being dependable.",
            "implicit_arc": f"{first} equates needing help with letting people down.",
        },
        "current_situation": {
            "circumstances": circumstances,
            "main_goal": goal,
            "vision": f"{first} hopes to look back on this as the point things turned.",
        },
        "story": {
            "trigger": trigger,
            "development": [
                f"{first} tells nobody for several days.",
                f"Small tasks start to slip and {first} notices.",
                f"{first} snaps at someone who asks if everything is fine.",
                f"Late at night {first} decides to talk it through with someone.",
            ],
            "outcome": f"{first} is still in the middle of it, unsure what comes next.",
            "epilogue": f"A memory {first} rarely shares: a time {pron[0]} asked for help and it worked.",
        },
    }
    mechanism = f"{primary}-{mode}"
    return {
        "id": f"syn-{index + 1:03d}",
        "provenance": "synthetic",
        "persona": persona,
        "crisis_event": f"{trigger} {circumstances}",
        "labels": [{"name": topic, "primary": True}, {"name": domain, "primary": False}],
        "domain_label": domain,
        "mechanism_label": mechanism,
        "persona_type": "Defensive" if defensive else "Receptive",
        "iedr": iedr_json(levels, seed),
        "difficulty_band": band,
    }, r0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "corpus"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # Index i -> domain i // 5, axis i % 3, mode alternating per axis.
    entries = []
    axis_seen = {a: 0 for a in AXES}
    for i in range(30):
        domain = DOMAINS[i // 5]
        seed = SEEDS[domain][i % 5]
        primary = AXES[i % 3]
        mode = "Challenging" if axis_seen[primary] % 2 else "Routine"
        axis_seen[primary] += 1
        defensive = mode == "Challenging" or i == 0
        band = BANDS[i % 4]
        scenario, r0 = build(i, domain, seed, primary, mode, defensive, band)
        fname = scenario["id"] + ".json"
        (out / fname).write_text(json.dumps(scenario, indent=2, ensure_ascii=False) + "\n")
        entries.append({
            "id": scenario["id"], "file": fname, "primary_label": scenario["labels"][0]["name"],
            "domain": domain, "mechanism": scenario["mechanism_label"],
            "persona_type": scenario["persona_type"], "band": band, "r0": r0,
        })
    manifest = {"corpus": "synthetic-30", "schema": "empa.corpus/v1", "scenarios": entries}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
