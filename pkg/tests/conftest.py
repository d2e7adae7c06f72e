import sys
from pathlib import Path

# Let tests import the shared synth helpers as a plain module.
sys.path.insert(0, str(Path(__file__).parent))
