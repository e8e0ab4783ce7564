#!/usr/bin/env python3
# Regenerates the sample data in this directory. Deterministic.
#
#   python3 samples/data/generate.py

import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
rng = random.Random(20220401)

BOOKS = [
    ("Don Quijote de la Mancha", ["ENFP", "ISFJ", "ESTJ"]),
    ("Cien años de soledad", ["INTP", "ENTJ", "INFJ"]),
    ("La sombra del viento", ["INFP", "ESTP", "ISTJ"]),
    ("Rayuela", ["ENTP", "INFP", "ISFP"]),
    ("La casa de los espíritus", ["INFJ", "ESTJ", "ENFJ"]),
    ("Niebla", ["INTP", "ISFJ", "ESFP"]),
    ("Marianela", ["ISFP", "ENFJ", "ISTP"]),
    ("Pedro Páramo", ["ISTJ", "INTJ", "INFP"]),
    ("El túnel", ["INTJ", "INFJ", "ESTP"]),
    ("La regenta", ["ISFJ", "ENTJ", "ESFJ"]),
    ("Fortunata y Jacinta", ["ESFJ", "ENFP", "ISTJ"]),
    ("Nada", ["INFP", "ESTP", "ISFP"]),
    ("La colmena", ["ESTJ", "ISTP", "ENFP"]),
    ("Platero y yo", ["ISFP", "INFJ", "ESFJ"]),
    ("El principito", ["INFP", "ENTJ", "ESTJ"]),
    ("Como agua para chocolate", ["ESFP", "ISFJ", "ENFJ"]),
    ("La tregua", ["ISTJ", "ENFP", "INFJ"]),
    ("Crónica de una muerte anunciada", ["ESTP", "ISTJ", "INTP"]),
    ("El amor en los tiempos del cólera", ["INFJ", "ESFJ", "ENTP"]),
    ("La isla del tesoro", ["ESTP", "ENTJ", "ISFJ"]),
    ("Los pazos de Ulloa", ["ENTJ", "ISFP", "ISTJ"]),
    ("Bodas de sangre", ["ESFP", "INTJ", "INFP"]),
    ("La ciudad y los perros", ["ISTP", "ENTP", "ESTJ"]),
    ("El árbol de la ciencia", ["INTP", "ESFP", "INFJ"]),
    ("Tiempo de silencio", ["INTJ", "ISFJ", "ENFP"]),
    ("Misericordia", ["ISFJ", "ESTP", "INTP"]),
    ("El camino", ["ENFP", "ISTJ", "ESFJ"]),
    ("Ficciones", ["INTJ", "ENTP", "ISTP"]),
    ("La vida es sueño", ["INFJ", "ENTJ", "ISFP"]),
    ("Réquiem por un campesino español", ["ISFJ", "ESTJ", "INFP"]),
    ("Luces de bohemia", ["ENTP", "ESFP", "INTJ"]),
    ("El lazarillo de Tormes", ["ESTP", "ISTJ", "ENFJ"]),
    ("Corazón tan blanco", ["INTP", "INFJ", "ESTJ"]),
    ("Patria", ["ESTJ", "ISFJ", "ENFP"]),
    ("El infinito en un junco", ["INTJ", "ENFJ", "ISTP"]),
    ("Los santos inocentes", ["ISFP", "ESTJ", "INFJ"]),
    ("La familia de Pascual Duarte", ["ISTP", "ESFJ", "INTP"]),
    ("Sangre y arena", ["ESTP", "INFP", "ENTJ"]),
    ("El jardín de las dudas", ["INTP", "ESFP", "ISTJ"]),
    ("Mientras agonizo", ["INFJ", "ESTP", "ISFJ"]),
    ("El viejo y el mar", ["ISTJ", "ENFP", "INTJ"]),
    ("Mujercitas", ["ENFJ", "ISFP", "ESTJ"]),
    ("Orgullo y prejuicio", ["ENTP", "INTJ", "ESFJ"]),
    ("Cumbres borrascosas", ["INFP", "ESTP", "ISFJ"]),
    ("Frankenstein", ["INTJ", "INFP", "ESTJ"]),
    ("Drácula", ["ENTJ", "ISFJ", "ISTP"]),
    ("Jane Eyre", ["INFJ", "ESTJ", "ENFP"]),
    ("El conde de Montecristo", ["INTJ", "ESFJ", "ENTP"]),
    ("Los miserables", ["ISFJ", "ESTJ", "INFP"]),
    ("Madame Bovary", ["ENFP", "ISTJ", "ESFP"]),
]
assert len(BOOKS) == 50

SUBJECTS = [
    "un joven soñador", "una mujer valiente", "un viejo marinero", "una niña curiosa",
    "un soldado cansado", "una madre fuerte", "un poeta triste", "una maestra paciente",
    "un médico solitario", "una viajera inquieta", "un campesino honrado", "una escritora rebelde",
]
ACTIONS = [
    "que busca la libertad", "que huye de su pasado", "que escribe cartas de amor",
    "que defiende a su familia", "que sueña con el mar", "que guarda un secreto",
    "que lucha contra el miedo", "que recuerda su infancia", "que viaja sin rumbo",
    "que cuida de los demás", "que desafía las normas", "que espera una respuesta",
]
SETTINGS = [
    "en una ciudad gris", "durante la guerra", "en un pueblo pequeño", "junto al río",
    "en una isla lejana", "bajo la lluvia de invierno", "en las montañas del norte",
    "en una casa antigua", "a la luz de la luna", "entre libros y silencio",
]
TAILS = [
    "y nunca pierde la esperanza", "aunque el tiempo pasa deprisa", "mientras aprende a perdonar",
    "y descubre quién es de verdad", "con una sonrisa tranquila", "y cambia la vida de todos",
]


def seed_cases():
    seen = set()
    out = []
    for title, personalities in BOOKS:
        for personality in personalities:
            while True:
                text = " ".join([rng.choice(SUBJECTS), rng.choice(ACTIONS), rng.choice(SETTINGS), rng.choice(TAILS)])
                text = text[0].upper() + text[1:] + "."
                if text not in seen:
                    seen.add(text)
                    break
            out.append({"text": text, "book_title": title, "personality": personality})
    return out


CLUSTERS = {
    "mar": ["mar", "marinero", "isla", "río", "lluvia", "agua", "barco", "olas", "playa"],
    "amor": ["amor", "cartas", "sonrisa", "perdonar", "esperanza", "corazón", "querer", "beso"],
    "miedo": ["miedo", "guerra", "soldado", "lucha", "huye", "pasado", "secreto", "muerte"],
    "familia": ["madre", "familia", "niña", "infancia", "casa", "cuida", "hijos", "hogar"],
    "viaje": ["viaja", "viajera", "rumbo", "camino", "lejana", "montañas", "norte", "libertad"],
    "letras": ["poeta", "escritora", "libros", "maestra", "escribe", "palabras", "leer", "silencio"],
    "ánimo": ["triste", "cansado", "solitario", "gris", "saludable", "feliz", "alegre", "sonreír"],
}
DIM = 16


def embeddings(words):
    centroids = {k: [rng.gauss(0, 1) for _ in range(DIM)] for k in CLUSTERS}
    word_cluster = {w: k for k, ws in CLUSTERS.items() for w in ws}
    lines = []
    for w in sorted(words):
        if w in word_cluster:
            c = centroids[word_cluster[w]]
            v = [x + rng.gauss(0, 0.35) for x in c]
        else:
            v = [rng.gauss(0, 1) for _ in range(DIM)]
        lines.append(w + " " + " ".join(f"{x:.6f}" for x in v))
    return "\n".join(lines) + "\n"


def tokens(text):
    cleaned = "".join(ch.lower() if ch.isalnum() else " " for ch in text)
    return cleaned.split()


PAIRS = [
    ("Un viejo marinero que sueña con el mar", "Un viejo marinero que sueña con el mar", "same"),
    ("Una madre fuerte que cuida de los demás", "Una madre fuerte que cuida de los demás", "same"),
    ("Sonreír es lo más saludable que puedes hacer a diario",
     "Sonreír es lo más saludable que puedes hacer a diario", "same"),
    ("Un joven soñador que busca la libertad", "Un joven soñador que busca la esperanza", "paraphrase"),
    ("Una escritora rebelde que escribe cartas de amor", "Una poeta rebelde que escribe cartas de amor",
     "paraphrase"),
    ("El soldado cansado huye de la guerra", "El soldado triste huye de la guerra", "paraphrase"),
]


def dump():
    lines = []
    n = 0

    def rec(text, country="ES", author=None):
        nonlocal n
        n += 1
        r = {"tweet_id": f"{1500000000000000000 + n}", "author_id": author or f"u{n % 4}",
             "lang": "es", "created_at": f"2022-03-{n % 28 + 1:02d}T12:00:00Z"}
        if text is not None:
            r["text"] = text
        if country is not None:
            r["country"] = country
        lines.append(json.dumps(r, ensure_ascii=False))

    long_texts = []
    for i in range(12):
        words = []
        while len(words) < 21 + i % 5:
            words += tokens(rng.choice(SUBJECTS) + " " + rng.choice(ACTIONS) + " " + rng.choice(SETTINGS))
        text = " ".join(words[: 21 + i % 5])
        long_texts.append(text)
        rec(text.capitalize() + " #libros")
    rec(long_texts[0].upper() + " #LIBROS")
    rec(long_texts[1] + " #libros!!")
    rec(None)
    rec("")
    rec("@alguien https://t.co/abc")
    rec(long_texts[2] + " extra", country="MX")
    rec(long_texts[3] + " más", country=None)
    rec(" ".join(tokens(SUBJECTS[0] + " " + ACTIONS[0] + " " + SETTINGS[0] + " y luego nada más hoy"))[:200])
    rec("Hoy leo poco")
    lines.append("{esto no es json")
    return "\n".join(lines) + "\n"


def main():
    seeds = seed_cases()
    (HERE / "seed_cases.json").write_text(json.dumps(seeds, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    vocab = set()
    for s in seeds:
        vocab.update(tokens(s["text"]))
    for a, b, _ in PAIRS:
        vocab.update(tokens(a))
        vocab.update(tokens(b))
    for ws in CLUSTERS.values():
        vocab.update(ws)
    (HERE / "embeddings.txt").write_text(embeddings(vocab), encoding="utf-8")
    pairs = [{"text_a": a, "text_b": b, "label": label} for a, b, label in PAIRS]
    (HERE / "pairs.json").write_text(json.dumps(pairs, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    (HERE / "dump.jsonl").write_text(dump(), encoding="utf-8")


if __name__ == "__main__":
    main()
