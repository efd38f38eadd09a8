"""Pytest wiring: configure Django exactly as manage.py does."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'spectrumShare.settings')
django.setup()
