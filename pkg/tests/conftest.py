from __future__ import annotations

import pytest

from bodylang.domain import ActionVocabulary, AttributeVocabulary, Camera


@pytest.fixture(scope="session")
def actions() -> ActionVocabulary:
    return ActionVocabulary()


@pytest.fixture(scope="session")
def attributes() -> AttributeVocabulary:
    return AttributeVocabulary()


@pytest.fixture()
def camera() -> Camera:
    return Camera(
        camera_id="cam1",
        latitude=40.0030,
        longitude=116.3200,
        indoor=False,
        detection_zone=((100.0, 100.0), (500.0, 100.0), (500.0, 400.0), (100.0, 400.0)),
        frame_width=1920,
        frame_height=1080,
    )
