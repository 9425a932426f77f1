import contextlib

import pytest

from minpair.corpus import Origin, SentencePair

_acceptance_results = []


@pytest.fixture
def acceptance():
    """Context manager recording one pass/fail line per release criterion."""
    @contextlib.contextmanager
    def criterion(name):
        try:
            yield
        except BaseException:
            _acceptance_results.append((name, "FAIL"))
            raise
        else:
            _acceptance_results.append((name, "PASS"))
    return criterion


def pytest_terminal_summary(terminalreporter):
    if _acceptance_results:
        terminalreporter.section("acceptance criteria")
        for name, outcome in _acceptance_results:
            terminalreporter.write_line(f"[ACCEPTANCE] {name}: {outcome}")


@pytest.fixture(scope="session")
def paper_pairs():
    """The worked construction examples, one per error type."""
    return {
        "placeholder_ding": SentencePair(
            "fx:1",
            "Prague Stock Market falls to minus by the end of the trading day",
            "Die Prager Börse stürzt gegen Geschäftsschluss ins Minus.",
        ),
        "placeholder_ding_2": SentencePair(
            "fx:2",
            "Yesterday evening, the committee wanted to vote on the appointment.",
            "Gestern Abend wollte der Ausschuss über die Ernennung abstimmen.",
        ),
        "hypercorrect_genitive": SentencePair(
            "fx:3",
            "I've loved you ever since that day in the rose garden.",
            "Ich liebe dich seit dem Tag im Rosengarten.",
        ),
        "hypercorrect_genitive_2": SentencePair(
            "fx:4",
            "Why did Judah lose its land and temple?",
            "Warum verlor Juda sein Land mitsamt dem Tempel?",
        ),
        "polarity_affix_del": SentencePair(
            "fx:5",
            "The probes unexpectedly become faster or slower.",
            "Die Sonden werden unerwartet schneller oder langsamer.",
        ),
        "clause_omission": SentencePair(
            "fx:6",
            "And even if it could be proved for humans - how would one want to prove it for rats?",
            "Und selbst wenn man das für den Menschen beweisen könnte: Wie wollte man es bei Ratten nachweisen?",
        ),
    }


@pytest.fixture
def machine_origin():
    return Origin("machine", "deepl")
