"""Regenerates the three-game fixture corpus. Output is committed; rerun only on purpose."""

import json
import os
import random

HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus")

GAMES = [
    {
        "game_id": "lantern_harbor",
        "title": "Lantern Harbor",
        "weight": 2.4,
        "avg_rating": 7.6,
        "year": 2019,
        "rank": 412,
        "mechanics": ["Worker Placement", "Set Collection"],
        "themes": ["Nautical", "Trade"],
        "terms": ["Dock Workers", "Lantern Track", "Cargo Tiles", "Harbor Master", "Tide Phase"],
        "mean": 7.6,
    },
    {
        "game_id": "copper_canyon",
        "title": "Copper Canyon",
        "weight": 3.3,
        "avg_rating": 6.4,
        "year": 2021,
        "rank": 1288,
        "mechanics": ["Deck Building", "Area Majority"],
        "themes": ["Western", "Mining"],
        "terms": ["Claim Markers", "Ore Deck", "Assay Office", "Dynamite Cards", "Railhead"],
        "mean": 6.3,
    },
    {
        "game_id": "starfall_bazaar",
        "title": "Starfall Bazaar",
        "weight": 1.6,
        "avg_rating": 5.4,
        "year": 2017,
        "mechanics": ["Push Your Luck", "Dice Rolling"],
        "themes": ["Space", "Market"],
        "terms": ["Comet Dice", "Bazaar Stalls", "Star Shards", "Bust Track", "Merchant Guild"],
        "mean": 5.2,
    },
]

RULEBOOK = """# Overview
{title} is a game for 2 to 4 players. Each player leads a rival crew and the goal is to earn the most victory points before the final round.

# Components
- 1 game board with the **{t1}**
- 60 **{t2}**
- 4 player boards, 40 wooden tokens and 30 coins
- 1 **{t3}** standee

# Setup
Place the board in the middle of the table. Shuffle the **{t2}** and deal three to each player. Each player takes 10 tokens of their colour and 3 coins. The youngest player becomes the first player and takes the **{t3}**.

# How to Play
The game lasts eight rounds. Each round has three phases played in order: the action phase, the **{t5}** and the cleanup phase. Players take turns clockwise starting with the first player.

## Actions
On your turn place one token on an open action space and resolve it immediately. Spaces on the **{t1}** let you gain coins, draw **{t2}**, or trade two coins for one card from the market.

### Blocking
A space holding another player's token is blocked until the cleanup phase.

# Core Rules
During the **{t5}** every player with the most tokens next to the **{t4}** gains 2 victory points. Ties are friendly: all tied players gain the points.

# Scoring
At the end of the game add victory points from cards, tokens on the **{t1}** and 1 point per 3 coins. The player with the most points wins. Ties go to the player with more coins.

# FAQ
Q: Can I place a token on a blocked space? A: No, blocked spaces stay closed until cleanup.
Q: What if the **{t2}** run out? A: Shuffle the discard pile to form a new deck.
"""

OPENERS = [
    "Played {title} three times this month with my regular group.",
    "Got {title} to the table last weekend with four players.",
    "After ten plays of {title} I have a settled opinion.",
    "We picked up {title} on a recommendation and tried it twice.",
]

MECHANIC = [
    "The {a} drive the worker placement, because every space you take blocks someone else.",
    "Drafting {a} is the heart of it, which means every pick changes what your neighbour can build.",
    "The engine you build from {a} forces hard choices about the {b} every single round.",
    "The dice around the {a} add tension since a bad roll can cost you the {b}.",
    "Managing cards and resources around the {a} makes the turn order matter a lot.",
]

FACET = [
    "The rulebook explains the {b} badly and we had to learn it from a video.",
    "It is a heavy brain burner and I had to plan ahead three turns.",
    "There is real interaction and people block each other constantly.",
    "Luck from the draw is real but there is enough strategy to mitigate it.",
    "The balance feels off because the first player has an advantage on the {b}.",
    "Replay value is strong since the setup changes every game.",
    "The theme is thin and the story never shows up in play.",
    "Downtime can drag with four players and the game runs long.",
]

PERSONA = [
    "I like that it rewards optimizing a tight, punishing engine with no luck.",
    "Setup is quick and the rules are streamlined, with no fiddly bookkeeping.",
    "The world and narrative pull you in, it feels like an epic journey.",
    "It works as a party game with friends and family, easy to teach and full of laughs.",
    "I love the push your luck thrill and the high stakes risk of going bust.",
]

POSITIVE = ["Overall it is a clever, satisfying design I love.", "Great fun and a smooth, excellent experience."]
NEGATIVE = ["Overall it felt tedious and frustrating for us.", "Honestly a dull and disappointing play."]
MIXED = ["It is fine but not special.", "Decent, though I see why opinions differ."]
ADVICE = [
    "I wish the designer had added a cap on the {b}.",
    "It should come with a house rule for the endgame.",
    "A fix for the scoring would be better.",
]

SHORT = ["Fun game, would play again.", "Not for me at all.", "Great with the family, quick to play."]
SHIPPING = [
    "My copy arrived damaged and customer service took six weeks to reply about the shipping problem. "
    "The kickstarter delivery was a mess and I am still waiting for the replacement parts to show up here."
]
ART = [
    "The artwork is stunning and the illustration on every piece is gorgeous. The card stock feels premium "
    "and the box insert is lovely, honestly the art alone justifies the price for me and my shelf."
]


def review_text(rng, game, rating):
    t = game["terms"]
    a, b = rng.sample(t, 2)
    fill = lambda s: s.format(title=game["title"], a=a, b=b)
    parts = [fill(rng.choice(OPENERS)), fill(rng.choice(MECHANIC))]
    parts += [fill(s) for s in rng.sample(FACET, rng.randint(1, 3))]
    parts.append(rng.choice(PERSONA))
    if rng.random() < 0.5:
        parts.append(fill(rng.choice(ADVICE)))
    if rating >= 7.5:
        parts.append(rng.choice(POSITIVE))
    elif rating <= 4.5:
        parts.append(rng.choice(NEGATIVE))
    else:
        parts.append(rng.choice(MIXED))
    return " ".join(parts)


def main():
    rng = random.Random(20240531)
    os.makedirs(os.path.join(HERE, "rulebooks"), exist_ok=True)
    with open(os.path.join(HERE, "games.jsonl"), "w") as f:
        for g in GAMES:
            rec = {k: g[k] for k in ("game_id", "title", "weight", "avg_rating", "year", "mechanics", "themes")}
            if "rank" in g:
                rec["rank"] = g["rank"]
            f.write(json.dumps(rec, sort_keys=True) + "\n")
            t = g["terms"]
            body = RULEBOOK.format(title=g["title"], t1=t[0], t2=t[1], t3=t[3], t4=t[2], t5=t[4])
            with open(os.path.join(HERE, "rulebooks", g["game_id"] + ".md"), "w") as rb:
                rb.write(body)
    with open(os.path.join(HERE, "raw_reviews.jsonl"), "w") as f:
        for g in GAMES:
            for i in range(80):
                rating = min(10.0, max(1.0, round(rng.gauss(g["mean"], 1.6) * 2) / 2))
                kind = rng.random()
                if kind < 0.08:
                    text = rng.choice(SHORT)
                elif kind < 0.12:
                    text = rng.choice(SHIPPING)
                elif kind < 0.16:
                    text = rng.choice(ART)
                else:
                    text = review_text(rng, g, rating)
                rec = {
                    "review_id": "%s-%03d" % (g["game_id"], i),
                    "game_id": g["game_id"],
                    "rating": rating,
                    "text": text,
                    "source": "fixture",
                }
                f.write(json.dumps(rec, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
