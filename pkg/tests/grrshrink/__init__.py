"""Tests for grrshrink"""
