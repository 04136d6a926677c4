"""
Scoring text with lexicons
==========================

Each paragraph is a bag of words scored against a lexicon. The default
mode is the mean score of the lexicon words present; ``literal`` divides
by the summed scores of the whole lexicon instead.
"""
from memepredict import Lexicon, language_features, score
from memepredict.textfeat import tokenize

happy = Lexicon("happiness", {"joy": 8.2, "gloom": 2.1, "table": 5.0})
doc = tokenize("Joy, joy and more joy! Only a little gloom at the table.")
print(dict(doc))
print("weighted average:", score(doc, happy))
print("literal:", score(doc, happy, "literal"))
print("no lexicon words:", score(tokenize("nothing here"), happy))

lexicons = {
    "happiness": happy,
    "arousal": Lexicon("arousal", {"joy": 7.0, "gloom": 3.0}),
    "dominance": Lexicon("dominance", {"table": 5.5}),
    "polarity": Lexicon("polarity", {"joy": 1.0, "gloom": -1.0}),
}
paragraphs = ["So much joy today.", "A gloom settles in.", "Unscored words only."]
print("per-meme features (happiness, arousal, dominance, polarity):",
      language_features(paragraphs, lexicons))
