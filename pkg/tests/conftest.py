from hypothesis import settings

settings.register_profile("suite", max_examples=50, deadline=None)
settings.load_profile("suite")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: longer-running statistical test")
    config.addinivalue_line(
        "markers", "acceptance: end-to-end acceptance criterion (see tests/test_acceptance.py)"
    )
