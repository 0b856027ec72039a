"""回転浅水方程式の不変解の数値実験ツール"""
