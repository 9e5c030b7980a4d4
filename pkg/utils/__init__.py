# Configuration loading and initial data
