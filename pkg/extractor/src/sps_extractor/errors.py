class JobError(Exception):
    """Extraction job cannot run (model missing, bad layer, dim mismatch)."""
