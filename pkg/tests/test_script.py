def test_spikecodec_version() -> None:
    import subprocess

    import spikecodec

    actual_output = (
        subprocess.check_output(["spikecodec", "--version"]).decode("utf-8").strip()
    )
    assert actual_output == f"spikecodec, version {spikecodec.__version__}"
