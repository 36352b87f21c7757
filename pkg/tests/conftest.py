from datetime import date

import pytest

from cblab import reference_market, reference_terms


@pytest.fixture(scope="session")
def table1():
    return reference_terms()


@pytest.fixture(scope="session")
def market():
    return reference_market()


@pytest.fixture(scope="session")
def issue():
    return date(2002, 1, 2)


@pytest.fixture(scope="session")
def jan2004():
    return date(2004, 1, 2)
