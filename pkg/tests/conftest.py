import json
import pathlib

import pytest

from gary.layout import Viewport, paginate
from gary.text import segment_phrases, tokenize

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def story_text() -> str:
    return (FIXTURES / "racconto_mare.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def story_seg(story_text):
    return segment_phrases(tokenize(story_text, "racconto_mare", "Il racconto del mare"))


@pytest.fixture(scope="session")
def viewport() -> Viewport:
    return Viewport()


@pytest.fixture(scope="session")
def story_pages(story_seg, viewport):
    return paginate(story_seg, viewport)


@pytest.fixture(scope="session")
def readability_fixtures() -> dict:
    return json.loads((FIXTURES / "readability_fixtures.json").read_text(encoding="utf-8"))


TRENO_TEXT = (
    "Il treno parte alle otto dal piccolo binario. "
    "Una signora saluta dal finestrino con la mano. "
    "I campi corrono veloci dietro il vetro freddo. "
    "Alla stazione nuova ci aspetta una giornata piena di sole. "
    "Il controllore passa e sorride ai bambini seduti. "
    "Alla fine del viaggio tutti scendono felici e stanchi."
)


@pytest.fixture(scope="session")
def treno_seg():
    return segment_phrases(tokenize(TRENO_TEXT, "treno", "Il treno"))


@pytest.fixture(scope="session")
def treno_pages(treno_seg, viewport):
    return paginate(treno_seg, viewport)
