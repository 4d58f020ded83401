import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

sys.path.insert(0, str(Path(__file__).resolve().parent))


def peano(n: int) -> str:
    out = "0"
    for _ in range(n):
        out = f"s({out})"
    return out


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def appendix_a_source() -> str:
    return (FIXTURES / "site" / "factorial_peano.md").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def appendix_b_source() -> str:
    return (FIXTURES / "site" / "assertion_checking.md").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def peano_program_text() -> str:
    return (FIXTURES / "programs" / "factorial_peano.pl").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def arith_program_text() -> str:
    return (FIXTURES / "programs" / "factorial_arith.pl").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def tools_manifest_path() -> Path:
    return FIXTURES / "tools.json"


@pytest.fixture()
def site_config_factory(tmp_path, tools_manifest_path):
    """Builds SiteConfig values over the fixture site in a temp outdir."""
    from ald.site_builder import SiteConfig

    def factory(out_name="out", cache_enabled=True, source_dir=None):
        return SiteConfig(
            source_dir=source_dir or FIXTURES / "site",
            output_dir=tmp_path / out_name,
            manifest_path=tools_manifest_path,
            default_tool_id="mock_analyzer",
            cache_enabled=cache_enabled,
        )

    return factory
